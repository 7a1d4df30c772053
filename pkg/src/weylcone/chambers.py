"""Parametric polytopes P(x) = {v : mu_i(v) + x_i >= 0} and chamber calculus.

For each subset sigma whose complementary normals form a basis of V*, the
vertex map s_sigma(x) solves mu_i(v) + x_i = 0 over the complement.  Offsets x
for which s_sigma(x) lands inside P(x) form the closed cone C(sigma); maximal
common refinements of these cones are the chambers.  On a chamber, the
exponential integral over P(x) is the finite vertex sum (per-sigma closed
form), and its degenerate-direction limit is computed symbolically as an exact
polynomial-times-exponential function of the offset parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Mapping, Sequence

from . import polyhedra
from .linalg import (
    Mat,
    Vec,
    det,
    dot,
    identity,
    invert,
    is_zero,
    mat_vec,
    neg,
    rank,
    solve_any,
    transpose,
    vec,
    zeros,
)
from .polyhedra import HPolyhedron
from .tfinite import Polynomial, TFiniteFunction


class PoleCancellationError(AssertionError):
    """Internal-error report: negative powers survived the limit regrouping."""


@dataclass(frozen=True)
class ParametricPolyhedron:
    """Normals plus an affine offset map theta -> x(theta) in R^N.

    The default map is the identity (parameters are the offsets themselves).
    Construction verifies that some parameter value yields a nonempty,
    line-free polyhedron.
    """

    normals: tuple[Vec, ...]  # mu_i as form vectors on V = Q^d
    dim: int  # dim V
    offset_matrix: Mat  # N x m
    offset_const: Vec  # length N

    @staticmethod
    def make(normals: Sequence[Sequence], dim: int, offset_matrix=None, offset_const=None):
        mus = tuple(vec(m) for m in normals)
        n = len(mus)
        om = tuple(vec(r) for r in offset_matrix) if offset_matrix is not None else identity(n)
        oc = vec(offset_const) if offset_const is not None else zeros(n)
        pp = ParametricPolyhedron(mus, dim, om, oc)
        if rank(mus, dim) < dim:
            raise ValueError("normals do not span the dual space (line in every P(x))")
        if not pp._somewhere_nonempty():
            raise ValueError("polyhedron empty for every parameter value")
        return pp

    @property
    def n_constraints(self) -> int:
        return len(self.normals)

    @property
    def n_params(self) -> int:
        return len(self.offset_matrix[0]) if self.offset_matrix else 0

    def offsets(self, theta: Sequence) -> Vec:
        th = vec(theta)
        return tuple(dot(row, th) + c for row, c in zip(self.offset_matrix, self.offset_const))

    def instance(self, x: Sequence) -> HPolyhedron:
        return HPolyhedron(self.normals, vec(x), self.dim)

    def _somewhere_nonempty(self) -> bool:
        from . import lp

        # joint feasibility over (v, theta): mu_i(v) + x_i(theta) >= 0
        m = self.n_params
        rows = []
        for mu, orow in zip(self.normals, self.offset_matrix):
            rows.append([-c for c in mu] + [-c for c in orow])
        rhs = list(self.offset_const)
        return lp.feasible_point(self.dim + m, a_ub=rows, b_ub=rhs) is not None


@dataclass(frozen=True)
class SigmaData:
    sigma: frozenset[int]
    complement: tuple[int, ...]
    dual_basis: tuple[Vec, ...]  # u_{i,sigma} for i in complement order
    vertex_matrix: Mat  # d x N, s_sigma(x) = vertex_matrix . x
    box_volume: Fraction


@dataclass(frozen=True)
class ChamberData:
    pp: ParametricPolyhedron
    sigmas: Mapping[frozenset[int], SigmaData]


def enumerate_bases(pp: ParametricPolyhedron) -> ChamberData:
    """All sigma whose complementary normal set is a basis, with dual data."""
    n, d = pp.n_constraints, pp.dim
    out = {}
    for comp in combinations(range(n), d):
        rows = [pp.normals[i] for i in comp]
        if rank(rows, d) < d:
            continue
        u_cols = invert(rows)  # columns are the dual basis
        dual = tuple(tuple(u_cols[r][k] for r in range(d)) for k in range(d))
        sigma = frozenset(range(n)) - frozenset(comp)
        vm_cols = []
        for j in range(n):
            if j in sigma:
                vm_cols.append(zeros(d))
            else:
                k = comp.index(j)
                vm_cols.append(neg(dual[k]))
        vmat = transpose(vm_cols)
        vol = abs(Fraction(1) / det(rows))
        out[sigma] = SigmaData(sigma, comp, dual, vmat, vol)
    return ChamberData(pp, out)


def vertex_map(data: SigmaData, x: Sequence) -> Vec:
    return mat_vec(data.vertex_matrix, vec(x))


@dataclass(frozen=True)
class ChamberAssignment:
    members: frozenset[frozenset[int]]
    maximal: bool


def chamber_of(cd: ChamberData, x: Sequence) -> ChamberAssignment:
    """Member set Sigma_x = {sigma : s_sigma(x) in P(x)}, with a maximality flag.

    The flag is set when every sigma is decided strictly (no vertex candidate
    sits exactly on a non-defining constraint), i.e. x is off every wall, so no
    perturbation of x can strictly enlarge the member set.
    """
    xv = vec(x)
    pp = cd.pp
    if polyhedra.feasible_point(pp.instance(xv)) is None:
        raise ValueError("outside C: P(x) is empty")
    members = set()
    decided = True
    for sigma, data in cd.sigmas.items():
        v = vertex_map(data, xv)
        slacks = [dot(pp.normals[j], v) + xv[j] for j in sorted(sigma)]
        if any(s < 0 for s in slacks):
            continue
        members.add(sigma)
        if not all(s > 0 for s in slacks):
            decided = False  # vertex candidate sits exactly on a wall
    return ChamberAssignment(frozenset(members), decided)


def same_chamber(cd: ChamberData, x: Sequence, y: Sequence) -> bool:
    """Tight-set transport test: every extreme point of P(x), moved by solving
    its tight subsystem at offsets y, must land on a unique point extreme in
    P(y)."""
    xv, yv = vec(x), vec(y)
    pp = cd.pp
    assignment = chamber_of(cd, xv)
    extremes = {}
    for sigma in assignment.members:
        v = vertex_map(cd.sigmas[sigma], xv)
        extremes[v] = None
    for v in extremes:
        tight = [i for i in range(pp.n_constraints) if dot(pp.normals[i], v) + xv[i] == 0]
        rows = [pp.normals[i] for i in tight]
        if rank(rows, pp.dim) < pp.dim:
            return False  # transported system is not a point
        w = solve_any(rows, [-yv[i] for i in tight], pp.dim)
        if w is None:
            return False
        if not all(dot(pp.normals[i], w) + yv[i] >= 0 for i in range(pp.n_constraints)):
            return False
        wt = [i for i in range(pp.n_constraints) if dot(pp.normals[i], w) + yv[i] == 0]
        if rank([pp.normals[i] for i in wt], pp.dim) < pp.dim:
            return False
    return True


def is_bounded(pp: ParametricPolyhedron) -> bool:
    """P(x) bounded wherever nonempty, i.e. the normals positively span."""
    cone = HPolyhedron(pp.normals, zeros(pp.n_constraints), pp.dim)
    return polyhedra.recession_direction(cone) is None


@dataclass(frozen=True)
class ExpSum:
    """Exact finite sum of coeff * e^{exponent} with rational data."""

    terms: tuple[tuple[Fraction, Fraction], ...]  # (coefficient, exponent)

    def eval(self) -> float:
        import mpmath

        with mpmath.workdps(50):
            total = mpmath.fsum(
                mpmath.mpf(c.numerator) / c.denominator * mpmath.exp(mpmath.mpf(e.numerator) / e.denominator)
                for c, e in self.terms
            )
            return float(total)


def bv_integral(cd: ChamberData, chamber: frozenset[frozenset[int]], x: Sequence, mu: Sequence) -> ExpSum:
    """Vertex-sum formula for ∫_{P(x)} e^{-mu(v)} dv on the given chamber.

    Requires mu generic on the chamber: mu(u_{i,sigma}) != 0 for every member
    sigma and dual vector.  The result is an exact coefficient/exponent sum.
    """
    xv = vec(x)
    muv = vec(mu)
    terms: dict[Fraction, Fraction] = {}
    for sigma in chamber:
        data = cd.sigmas[sigma]
        denom = Fraction(1)
        for u in data.dual_basis:
            val = dot(muv, u)
            if val == 0:
                raise ValueError(
                    "mu is not generic for this chamber (mu vanishes on a dual vector); "
                    "use bv_limit_tfinite"
                )
            denom *= val
        exponent = -dot(muv, vertex_map(data, xv))
        coeff = data.box_volume / denom
        terms[exponent] = terms.get(exponent, Fraction(0)) + coeff
    clean = tuple(sorted((c, e) for e, c in terms.items() if c != 0))
    return ExpSum(clean)


def _mu0_candidates(d: int):
    """Deterministic lexicographic sequence of integer covectors."""
    k = 1
    while True:
        for cand in product(range(-k, k + 1), repeat=d):
            if any(cand) and max(abs(c) for c in cand) == k:
                yield vec(cand)
        k += 1


def choose_mu0(cd: ChamberData, chamber, mu: Sequence) -> Vec:
    """First covector in the fixed sequence with mu0(u) != 0 wherever mu(u) = 0."""
    muv = vec(mu)
    degenerate = []
    for sigma in chamber:
        for u in cd.sigmas[sigma].dual_basis:
            if dot(muv, u) == 0:
                degenerate.append(u)
    for cand in _mu0_candidates(cd.pp.dim):
        if all(dot(cand, u) != 0 for u in degenerate):
            return cand
    raise AssertionError("unreachable: candidate sequence is infinite")


def bv_limit_tfinite(cd: ChamberData, chamber, mu: Sequence) -> TFiniteFunction:
    """Exact limit of the vertex-sum formula for possibly non-generic mu.

    Returns the integral ∫_{P(x(theta))} e^{-mu(v)} dv as a t-finite function
    of the offset parameters theta, valid on the chamber.  The perturbation
    mu + t*mu0 is expanded symbolically: per-sigma Laurent factors are grouped
    by the exact exponent form, negative powers of t must cancel within each
    group (checked; failure raises PoleCancellationError), and the t^0
    coefficient is assembled.  Requires a linear offset map (no constant part).
    """
    pp = cd.pp
    if not is_bounded(pp):
        raise ValueError("polyhedron is unbounded on its chambers; limit formula needs boundedness")
    if not is_zero(pp.offset_const):
        raise ValueError("symbolic limit requires a linear offset map (zero constant part)")
    muv = vec(mu)
    mu0 = choose_mu0(cd, chamber, muv)
    m = pp.n_params
    d = pp.dim

    # groups keyed by the linear form theta -> -mu(s_sigma(x(theta)))
    groups: dict[Vec, list] = {}
    for sigma in chamber:
        data = cd.sigmas[sigma]
        # s_sigma(x(theta)) = vertex_matrix . offset_matrix . theta
        smap = tuple(
            tuple(dot(row, col) for col in transpose(pp.offset_matrix))
            for row in data.vertex_matrix
        )  # d x m
        a_form = neg(mat_vec(transpose(smap), muv))  # -mu(s(theta)) as covector on theta
        b_form = mat_vec(transpose(smap), mu0)  # mu0(s(theta))
        groups.setdefault(a_form, []).append((data, b_form))

    terms: dict[Vec, Polynomial] = {}
    for a_form, members in groups.items():
        by_power: dict[int, Polynomial] = {}
        for data, b_form in members:
            vals = [dot(muv, u) for u in data.dual_basis]
            zero_idx = [i for i, v in enumerate(vals) if v == 0]
            msig = len(zero_idx)
            k_const = data.box_volume
            for i, v in enumerate(vals):
                k_const /= dot(mu0, data.dual_basis[i]) if v == 0 else v
            cs = [dot(mu0, data.dual_basis[i]) / vals[i] for i, v in enumerate(vals) if v != 0]
            # denominator series: prod 1/(1 + t c) = sum_j g_j t^j, to order msig
            g = [Fraction(1)] + [Fraction(0)] * msig
            for c in cs:
                powers = [Fraction(1)]
                for _ in range(msig):
                    powers.append(powers[-1] * (-c))
                g = [
                    sum((g[j - r] * powers[r] for r in range(j + 1)), Fraction(0))
                    for j in range(msig + 1)
                ]
            # exponential series: e^{-t * B(theta)} = sum_r ((-B)^r / r!) t^r
            neg_b = Polynomial.make(
                m,
                {
                    tuple(1 if i == j else 0 for i in range(m)): -c
                    for j, c in enumerate(b_form)
                    if c != 0
                },
            )
            powers_b = [Polynomial.constant(m, 1)]
            for _ in range(msig):
                powers_b.append(powers_b[-1] * neg_b)
            e_series = [p.scale(Fraction(1, _factorial(r))) for r, p in enumerate(powers_b)]
            # collect t^{j + r - msig} for j + r <= msig
            for j in range(msig + 1):
                if g[j] == 0:
                    continue
                for r in range(msig + 1 - j):
                    power = j + r - msig
                    contrib = e_series[r].scale(g[j] * k_const)
                    by_power[power] = by_power.get(power, Polynomial.make(m, {})) + contrib
        for power, poly in sorted(by_power.items()):
            if power < 0 and not poly.is_zero():
                raise PoleCancellationError(
                    f"negative power t^{power} failed to cancel in exponent group {a_form}"
                )
        p0 = by_power.get(0, Polynomial.make(m, {}))
        if not p0.is_zero():
            terms[a_form] = terms.get(a_form, Polynomial.make(m, {})) + p0

    f = TFiniteFunction.make(m, terms)
    for lam, p in f.terms.items():
        bound = d if is_zero(lam) else d - 1
        if p.degree() > bound:
            raise AssertionError(f"degree bound violated: {p.degree()} > {bound} for exponent {lam}")
    return f


def _factorial(r: int) -> int:
    out = 1
    for i in range(2, r + 1):
        out *= i
    return out
