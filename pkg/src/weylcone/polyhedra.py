"""Exact rational convex polyhedra and independent integration oracles.

H-representation: constraints (normal, offset) meaning normal . v + offset >= 0.
V-representation: tuple of extreme points.  All combinatorial questions (vertex
identity, faces, distances) are decided exactly over Q; floats appear only in
the integration oracles at the very end.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import lp
from .linalg import (
    Mat,
    Vec,
    add,
    coords_in_basis,
    det,
    dot,
    identity,
    independent_subset,
    is_zero,
    mat_vec,
    neg,
    nullspace,
    rank,
    scale,
    solve,
    solve_any,
    sub,
    vec,
    zeros,
)


class UnboundedError(ValueError):
    """Raised when a bounded polytope was required; carries a recession witness."""

    def __init__(self, direction: Vec):
        super().__init__(f"polyhedron is unbounded in direction {direction}")
        self.direction = direction


@dataclass(frozen=True)
class HPolyhedron:
    normals: tuple[Vec, ...]
    offsets: tuple[Fraction, ...]
    dim: int

    def __post_init__(self):
        for a, c in zip(self.normals, self.offsets):
            if is_zero(a) and c < 0:
                raise ValueError("trivially infeasible constraint with zero normal")

    @staticmethod
    def from_pairs(pairs: Sequence[tuple[Sequence, object]], dim: int) -> "HPolyhedron":
        return HPolyhedron(
            tuple(vec(a) for a, _ in pairs),
            tuple(Fraction(c) for _, c in pairs),
            dim,
        )

    def with_constraints(self, pairs) -> "HPolyhedron":
        extra = HPolyhedron.from_pairs(pairs, self.dim)
        return HPolyhedron(self.normals + extra.normals, self.offsets + extra.offsets, self.dim)

    # LP-ready rows: normal.v + offset >= 0  <=>  (-normal).v <= offset
    def ub_rows(self):
        return [neg(a) for a in self.normals], list(self.offsets)


@dataclass(frozen=True)
class VPolytope:
    vertices: tuple[Vec, ...]

    @property
    def dim(self) -> int:
        return len(self.vertices[0]) if self.vertices else 0

    def affine_basis(self) -> tuple[Vec, ...]:
        """Basis of the direction space of the affine hull."""
        if len(self.vertices) <= 1:
            return ()
        v0 = self.vertices[0]
        diffs = [sub(v, v0) for v in self.vertices[1:]]
        idx = independent_subset(diffs, self.dim)
        return tuple(diffs[i] for i in idx)

    def affine_dim(self) -> int:
        return len(self.affine_basis()) if self.vertices else -1


def feasible_point(h: HPolyhedron) -> Vec | None:
    a, b = h.ub_rows()
    return lp.feasible_point(h.dim, a_ub=a, b_ub=b)


def recession_direction(h: HPolyhedron) -> Vec | None:
    """A nonzero direction d with normal.d >= 0 for all constraints, else None."""
    rows = [neg(a) for a in h.normals]
    rhs = [Fraction(0)] * len(rows)
    box = [Fraction(1)] * h.dim
    for i in range(h.dim):
        for sign in (1, -1):
            obj = scale(sign, tuple(Fraction(j == i) for j in range(h.dim)))
            res = lp.solve(
                obj,
                h.dim,
                minimize=False,
                a_ub=rows + [identity(h.dim)[j] for j in range(h.dim)] + [neg(r) for r in identity(h.dim)],
                b_ub=rhs + box + box,
            )
            if res.ok and res.value > 0:
                return res.x
    return None


def vertices(h: HPolyhedron) -> VPolytope:
    """Exact extreme points via basis enumeration over tight constraint sets.

    Empty vertex list iff infeasible.  Raises UnboundedError (with witness)
    when the feasible set is nonempty and unbounded.
    """
    if feasible_point(h) is None:
        return VPolytope(())
    d = recession_direction(h)
    if d is not None:
        raise UnboundedError(d)
    n, dim = len(h.normals), h.dim
    found: set[Vec] = set()
    for subset in combinations(range(n), dim):
        rows = [h.normals[i] for i in subset]
        if rank(rows, dim) < dim:
            continue
        try:
            v = solve(rows, [-h.offsets[i] for i in subset])
        except ValueError:
            continue
        if v in found:
            continue
        if all(dot(a, v) + c >= 0 for a, c in zip(h.normals, h.offsets)):
            found.add(v)
    return VPolytope(tuple(sorted(found)))


def contains(h: HPolyhedron, x: Sequence[Fraction]) -> bool:
    return all(dot(a, x) + c >= 0 for a, c in zip(h.normals, h.offsets))


def tight_set(h: HPolyhedron, x: Sequence[Fraction]) -> frozenset[int]:
    return frozenset(i for i, (a, c) in enumerate(zip(h.normals, h.offsets)) if dot(a, x) + c == 0)


def face_lattice(h: HPolyhedron) -> dict[frozenset[int], tuple[Vec, ...]]:
    """All nonempty faces, keyed by their full tight-constraint set.

    Faces are the closure under intersection of the facet vertex sets, so the
    result contains the polytope itself, every facet, down to the vertices.
    """
    vp = vertices(h)
    if not vp.vertices:
        return {}
    vtight = {v: tight_set(h, v) for v in vp.vertices}
    # start from the whole polytope and intersect with constraint vertex sets
    all_verts = frozenset(vp.vertices)
    faces: set[frozenset[Vec]] = {all_verts}
    frontier = [all_verts]
    constraint_sets = [frozenset(v for v in vp.vertices if i in vtight[v]) for i in range(len(h.normals))]
    while frontier:
        nxt = []
        for face in frontier:
            for cs in constraint_sets:
                sub_face = face & cs
                if sub_face and sub_face not in faces:
                    faces.add(sub_face)
                    nxt.append(sub_face)
        frontier = nxt
    out: dict[frozenset[int], tuple[Vec, ...]] = {}
    for face in faces:
        key = frozenset.intersection(*(vtight[v] for v in face))
        out[key] = tuple(sorted(face))
    return out


def in_hull(points: Sequence[Vec], x: Sequence[Fraction]) -> bool:
    """Exact LP test: is x a convex combination of the points?"""
    if not points:
        return False
    m = len(points)
    a_eq = [[p[i] for p in points] for i in range(len(x))]
    a_eq.append([Fraction(1)] * m)
    b_eq = list(x) + [Fraction(1)]
    neg_id = [[Fraction(-1 if j == i else 0) for j in range(m)] for i in range(m)]
    return lp.feasible_point(m, a_ub=neg_id, b_ub=zeros(m), a_eq=a_eq, b_eq=b_eq) is not None


def extreme_points(points: Sequence[Vec]) -> tuple[Vec, ...]:
    """Subset of points not expressible as hulls of the others."""
    pts = sorted(set(points))
    keep = []
    for i, p in enumerate(pts):
        others = pts[:i] + pts[i + 1 :]
        if not in_hull(others, p):
            keep.append(p)
    return tuple(keep)


def minkowski_sum(a: VPolytope, b: VPolytope) -> VPolytope:
    if a.vertices and b.vertices and len(a.vertices[0]) != len(b.vertices[0]):
        raise ValueError("ambient dimension mismatch")
    sums = {add(p, q) for p in a.vertices for q in b.vertices}
    return VPolytope(extreme_points(tuple(sums)))


def support_value(v: VPolytope, direction: Sequence[Fraction]) -> Fraction:
    if not v.vertices:
        raise ValueError("empty polytope has no support function")
    return max(dot(direction, p) for p in v.vertices)


def to_hrep(v: VPolytope) -> HPolyhedron:
    """Facet enumeration (brute force over vertex subsets); affine hull becomes
    equality pairs.  Intended as an oracle and for small polytopes only."""
    if not v.vertices:
        raise ValueError("empty polytope has no H-representation")
    dim = v.dim
    v0 = v.vertices[0]
    basis = v.affine_basis()
    k = len(basis)
    pairs: list[tuple[Vec, Fraction]] = []
    # affine-hull equalities: forms vanishing on the span, pinned at v0
    for form in nullspace(basis, dim) if k < dim else ():
        c = dot(form, v0)
        pairs.append((form, -c))
        pairs.append((neg(form), c))
    if k == 0:
        return HPolyhedron.from_pairs(pairs, dim)
    coords = [coords_in_basis(basis, sub(p, v0)) for p in v.vertices]
    seen = set()
    for subset in combinations(range(len(coords)), k):
        diffs = [sub(coords[j], coords[subset[0]]) for j in subset[1:]]
        ns = nullspace(diffs, k)
        if len(ns) != 1:
            continue
        nrm = ns[0]
        base = dot(nrm, coords[subset[0]])
        vals = [dot(nrm, c) - base for c in coords]
        for sign in (1, -1):
            sv = [sign * x for x in vals]
            if all(x <= 0 for x in sv):
                key = _normalize_form(scale(sign, nrm), -sign * base)
                if key not in seen:
                    seen.add(key)
                    # lift back to ambient coordinates: form(y) = nrm . coords(y - v0)
                    amb = _lift_form(scale(-sign, nrm), basis, dim)
                    off = sign * base - dot(amb, v0)
                    pairs.append((amb, off))
    return HPolyhedron.from_pairs(pairs, dim)


def _lift_form(form_in_coords: Vec, basis: Sequence[Vec], dim: int) -> Vec:
    """Ambient covector agreeing with the coordinate covector on span(basis),
    zero on the complement of the coordinate chart's dual frame."""
    # rows: basis vectors; want w with w . b_j = form[j]; any solution works on the span
    w = solve_any([list(b) for b in basis], list(form_in_coords), dim)
    assert w is not None
    return w


def _normalize_form(normal: Vec, offset: Fraction):
    lead = next((x for x in normal if x != 0), None)
    if lead is None:
        return (normal, offset and Fraction(offset))
    s = 1 / abs(lead)
    return (scale(s, normal), Fraction(offset) * s)


def canonical_hrep(h: HPolyhedron) -> tuple:
    """Hashable canonical form of the constraint set (for H-rep comparisons).

    Scales every constraint to a unit leading coefficient and sorts; redundant
    constraints are not removed, so compare only like-constructed systems.
    """
    items = {_normalize_form(a, c) for a, c in zip(h.normals, h.offsets)}
    return tuple(sorted(items))


def squared_distance(
    forms: Sequence[Vec],
    poly: VPolytope,
    inner: Mat | None = None,
) -> Fraction:
    """Exact squared distance between ker(forms) and the polytope.

    The metric is the bilinear form `inner` (identity by default).  Strategy:
    an LP settles intersection (distance 0); otherwise the minimizer lies in
    the relative interior of some face, where it solves the unconstrained
    normal equations over affspan(face) x kernel — enumerate faces, keep the
    values whose minimizer set actually meets the face.
    """
    if not poly.vertices:
        raise ValueError("empty polytope")
    dim = poly.dim
    inner = inner if inner is not None else identity(dim)
    kernel = nullspace([f for f in forms if not is_zero(f)], dim)
    # shortcut: does the kernel meet the hull?  f . (sum lam_j p_j) = 0 per form
    m = len(poly.vertices)
    rows = [[dot(f, p) for p in poly.vertices] for f in forms]
    rows.append([Fraction(1)] * m)
    rhs = [Fraction(0)] * len(forms) + [Fraction(1)]
    neg_id = [[Fraction(-1 if j == i else 0) for j in range(m)] for i in range(m)]
    if lp.feasible_point(m, a_ub=neg_id, b_ub=zeros(m), a_eq=rows, b_eq=rhs) is not None:
        return Fraction(0)

    best: Fraction | None = None
    for face in _all_faces(poly):
        val = _face_min(face, kernel, inner)
        if val is not None and (best is None or val < best):
            best = val
    assert best is not None
    return best


def _all_faces(poly: VPolytope):
    """Vertex sets of all nonempty faces (via the H-rep lattice)."""
    if len(poly.vertices) == 1:
        return [poly.vertices]
    lattice = face_lattice(to_hrep(poly))
    return list(lattice.values())


def _face_min(face_verts: Sequence[Vec], kernel: Sequence[Vec], inner: Mat) -> Fraction | None:
    """Min of |p - k|^2 over p in affspan(face), k in span(kernel), provided
    some minimizer has p inside the face; None otherwise."""
    dim = len(face_verts[0])
    v0 = face_verts[0]
    fbasis = list(VPolytope(tuple(face_verts)).affine_basis())
    directions = fbasis + [neg(k) for k in kernel]
    nf = len(fbasis)
    nd = len(directions)
    # difference vector: r(t) = v0 + D t ; minimize r^T M r
    img = [mat_vec(inner, d) for d in directions]
    hess = [[dot(directions[i], img[j]) for j in range(nd)] for i in range(nd)]
    rhs = [-dot(directions[i], mat_vec(inner, v0)) for i in range(nd)]
    part = solve_any(hess, rhs, nd) if nd else ()
    if nd and part is None:
        return None  # cannot happen: PSD normal equations are always consistent
    null = nullspace(hess, nd) if nd else ()
    # feasibility: exists minimizer t = part + N s with p(t) in hull(face)
    # p(t) = v0 + sum_{i<nf} t_i fbasis_i ; barycentric lam over face vertices
    nv = len(face_verts)
    ns = len(null)
    width = ns + nv
    a_eq: list[list[Fraction]] = []
    b_eq: list[Fraction] = []
    for c in range(dim):
        row = [sum(null[s][i] * fbasis[i][c] for i in range(nf)) if nf else Fraction(0) for s in range(ns)]
        row += [-p[c] for p in face_verts]
        base = -v0[c] - (sum(part[i] * fbasis[i][c] for i in range(nf)) if nf else Fraction(0))
        a_eq.append(row)
        b_eq.append(base)
    a_eq.append([Fraction(0)] * ns + [Fraction(1)] * nv)
    b_eq.append(Fraction(1))
    neg_rows = [[Fraction(-1 if j == ns + i else 0) for j in range(width)] for i in range(nv)]
    sol = lp.feasible_point(width, a_ub=neg_rows, b_ub=zeros(nv), a_eq=a_eq, b_eq=b_eq)
    if sol is None:
        return None
    t = list(part)
    for s in range(ns):
        for i in range(nd):
            t[i] += sol[s] * null[s][i]
    r = list(v0)
    for i in range(nd):
        r = add(r, scale(t[i], directions[i]))
    return dot(r, mat_vec(inner, r))


def triangulate(poly: VPolytope) -> list[tuple[Vec, ...]]:
    """Decompose into simplices sharing the first vertex (recursively by facet).

    The face lattice is computed once; the recursion then works purely on
    vertex sets (the faces of a face are the lattice faces contained in it).
    """
    verts = poly.vertices
    k = poly.affine_dim()
    if k <= 0:
        return []
    if len(verts) == k + 1:
        return [verts]
    lattice = face_lattice(to_hrep(poly))
    faces = [(VPolytope(f).affine_dim(), frozenset(f), f) for f in lattice.values()]

    def rec(face_verts: tuple[Vec, ...], dim: int) -> list[tuple[Vec, ...]]:
        if len(face_verts) == dim + 1:
            return [face_verts]
        v0 = face_verts[0]
        fset = frozenset(face_verts)
        out: list[tuple[Vec, ...]] = []
        for d2, s2, f2 in faces:
            if d2 == dim - 1 and v0 not in s2 and s2 < fset:
                for simplex in rec(f2, dim - 1) if dim - 1 > 0 else [f2]:
                    out.append((v0,) + tuple(simplex))
        return out

    return rec(verts, k)


def volume(poly: VPolytope) -> Fraction:
    """Exact volume in the ambient dimension (0 for lower-dimensional sets)."""
    if not poly.vertices:
        return Fraction(0)
    d = poly.dim
    if poly.affine_dim() < d:
        return Fraction(0)
    total = Fraction(0)
    fact = 1
    for i in range(2, d + 1):
        fact *= i
    for simplex in triangulate(poly):
        m = [sub(p, simplex[0]) for p in simplex[1:]]
        total += abs(det(m))
    return total / fact


def _exp_divided_difference(values) -> float:
    """exp[y_0,...,y_d] via the matrix exponential of the Opitz bidiagonal."""
    import numpy as np
    from scipy.linalg import expm

    k = len(values)
    j = np.zeros((k, k))
    for i, y in enumerate(values):
        j[i, i] = y
    for i in range(k - 1):
        j[i, i + 1] = 1.0
    return float(expm(j)[0, k - 1])


def integrate_exp_oracle(poly: VPolytope, mu: Sequence) -> float:
    """Numeric ∫ e^{mu(v)} dv by simplicial decomposition + divided differences.

    Exact rational triangulation, then per-simplex closed form
    |det| * exp[mu(v_0),...,mu(v_d)]; all terms positive, no cancellation.
    """
    if not poly.vertices:
        return 0.0
    d = poly.dim
    if poly.affine_dim() < d:
        warnings.warn("polytope is lower-dimensional; integral over it is 0")
        return 0.0
    mu_f = [float(c) for c in mu]
    total = 0.0
    for simplex in triangulate(poly):
        m = [sub(p, simplex[0]) for p in simplex[1:]]
        dv = abs(det(m))
        ys = [sum(c * float(x) for c, x in zip(mu_f, p)) for p in simplex]
        total += float(dv) * _exp_divided_difference(ys)
    return total


def mc_integrate_exp(poly: VPolytope, mu: Sequence, samples: int, rng) -> tuple[float, float]:
    """Monte Carlo ∫ e^{mu} dv: (estimate, standard error).  Second-tier oracle."""
    import math

    simplices = triangulate(poly)
    if not simplices:
        return 0.0, 0.0
    d = poly.dim
    vols = []
    for s in simplices:
        m = [sub(p, s[0]) for p in s[1:]]
        v = abs(det(m))
        vols.append(float(v))
    fact = math.factorial(d)
    vols = [v / fact for v in vols]
    vol_total = sum(vols)
    mu_f = [float(c) for c in mu]
    acc = 0.0
    acc2 = 0.0
    cum = []
    run = 0.0
    for v in vols:
        run += v
        cum.append(run)
    for _ in range(samples):
        r = rng.random() * vol_total
        idx = next((i for i, c in enumerate(cum) if c >= r), len(cum) - 1)
        simplex = simplices[idx]
        # uniform barycentric coordinates via exponential spacings
        es = [-math.log(rng.random()) for _ in range(d + 1)]
        tot = sum(es)
        bary = [e / tot for e in es]
        pt = [0.0] * d
        for b, p in zip(bary, simplex):
            for c in range(d):
                pt[c] += b * float(p[c])
        val = math.exp(sum(c * x for c, x in zip(mu_f, pt)))
        acc += val
        acc2 += val * val
    mean = acc / samples
    var = max(acc2 / samples - mean * mean, 0.0)
    est = mean * vol_total
    se = vol_total * math.sqrt(var / samples)
    return est, se


# --- serialization ---------------------------------------------------------


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def parse_fraction(s) -> Fraction:
    return Fraction(s)


def h_to_json(h: HPolyhedron) -> str:
    return json.dumps(
        {
            "H": [
                {"normal": [_frac_str(x) for x in a], "offset": _frac_str(c)}
                for a, c in zip(h.normals, h.offsets)
            ],
            "dim": h.dim,
        }
    )


def h_from_json(text: str) -> HPolyhedron:
    data = json.loads(text)
    pairs = [(vec(map(Fraction, row["normal"])), Fraction(row["offset"])) for row in data["H"]]
    return HPolyhedron.from_pairs(pairs, data["dim"])


def v_to_json(v: VPolytope) -> str:
    return json.dumps({"V": [[_frac_str(x) for x in p] for p in v.vertices]})


def v_from_json(text: str) -> VPolytope:
    data = json.loads(text)
    return VPolytope(tuple(vec(map(Fraction, p)) for p in data["V"]))


def to_off(v: VPolytope) -> str:
    """OFF text for a 3-dimensional polytope (visual inspection only)."""
    import math

    if v.dim != 3 or v.affine_dim() != 3:
        raise ValueError("OFF export requires a full-dimensional 3-D polytope")
    verts = list(v.vertices)
    index = {p: i for i, p in enumerate(verts)}
    lattice = face_lattice(to_hrep(v))
    facets = [f for f in lattice.values() if VPolytope(f).affine_dim() == 2]
    faces_idx = []
    for f in facets:
        pts = [tuple(float(x) for x in p) for p in f]
        cx = [sum(c) / len(pts) for c in zip(*pts)]
        b1 = [p - c for p, c in zip(pts[0], cx)]
        normal = nullspace([sub(p, f[0]) for p in f[1:]], 3)
        nrm = [float(x) for x in normal[0]] if normal else [0.0, 0.0, 1.0]
        b2 = [
            nrm[1] * b1[2] - nrm[2] * b1[1],
            nrm[2] * b1[0] - nrm[0] * b1[2],
            nrm[0] * b1[1] - nrm[1] * b1[0],
        ]
        def ang(p):
            dx = [a - c for a, c in zip(p, cx)]
            return math.atan2(sum(a * b for a, b in zip(dx, b2)), sum(a * b for a, b in zip(dx, b1)))
        ordered = sorted(f, key=lambda q: ang(tuple(float(x) for x in q)))
        faces_idx.append([index[q] for q in ordered])
    lines = ["OFF", f"{len(verts)} {len(faces_idx)} 0"]
    for p in verts:
        lines.append(" ".join(repr(float(x)) for x in p))
    for fi in faces_idx:
        lines.append(str(len(fi)) + " " + " ".join(map(str, fi)))
    return "\n".join(lines) + "\n"
