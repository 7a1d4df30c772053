"""Exact polytope kernel and its numeric integration oracle."""

import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from weylcone import polyhedra as PH
from weylcone.linalg import dot, neg, sub, vec

fracs = st.fractions(min_value=-3, max_value=3, max_denominator=3)


def cube_h(d):
    normals = []
    offsets = []
    for i in range(d):
        e = [F(0)] * d
        e[i] = F(1)
        normals.append(tuple(e))
        offsets.append(F(0))  # x_i >= 0
        normals.append(tuple(-c for c in e))
        offsets.append(F(1))  # x_i <= 1
    return PH.HPolyhedron(tuple(normals), tuple(offsets), d)


def simplex_h(d):
    normals = []
    offsets = []
    for i in range(d):
        e = [F(0)] * d
        e[i] = F(1)
        normals.append(tuple(e))
        offsets.append(F(0))
    normals.append(tuple([F(-1)] * d))
    offsets.append(F(1))  # sum x_i <= 1
    return PH.HPolyhedron(tuple(normals), tuple(offsets), d)


def test_vertices_square():
    vp = PH.vertices(cube_h(2))
    assert set(vp.vertices) == {
        (F(0), F(0)),
        (F(0), F(1)),
        (F(1), F(0)),
        (F(1), F(1)),
    }


def test_vertices_empty_and_unbounded():
    empty = PH.HPolyhedron(((F(1),), (F(-1),)), (F(-2), F(1)), 1)
    assert PH.vertices(empty).vertices == ()
    ray = PH.HPolyhedron(((F(1),),), (F(0),), 1)
    with pytest.raises(PH.UnboundedError):
        PH.vertices(ray)


def test_tight_set_and_contains():
    h = cube_h(2)
    assert PH.contains(h, (F(1, 2), F(1, 2)))
    assert not PH.contains(h, (F(2), F(0)))
    corner = (F(0), F(1))
    tight = PH.tight_set(h, corner)
    assert tight == {0, 3}


def test_face_lattice_square_census():
    lattice = PH.face_lattice(cube_h(2))
    sizes = sorted(len(f) for f in lattice.values())
    # 4 vertices, 4 edges, 1 full face
    assert sizes == [1, 1, 1, 1, 2, 2, 2, 2, 4]


def test_face_lattice_simplex_census():
    lattice = PH.face_lattice(simplex_h(3))
    by_card = {}
    for f in lattice.values():
        by_card[len(f)] = by_card.get(len(f), 0) + 1
    assert by_card == {1: 4, 2: 6, 3: 4, 4: 1}


def test_in_hull_interval():
    pts = [(F(0),), (F(2),)]
    assert PH.in_hull(pts, (F(1),))
    assert PH.in_hull(pts, (F(2),))
    assert not PH.in_hull(pts, (F(5, 2),))
    assert not PH.in_hull([], (F(0),))


@given(st.tuples(fracs, fracs))
def test_in_hull_matches_hrep_membership(x):
    square = [(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1), F(1))]
    member = PH.in_hull(square, x)
    assert member == (0 <= x[0] <= 1 and 0 <= x[1] <= 1)


def test_extreme_points_drops_midpoints():
    pts = [(F(0),), (F(1),), (F(2),), (F(1, 2),)]
    assert PH.extreme_points(pts) == ((F(0),), (F(2),))


def test_minkowski_sum_square_plus_segment():
    sq = PH.VPolytope(((F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1), F(1))))
    seg = PH.VPolytope(((F(0), F(0)), (F(2), F(0))))
    s = PH.minkowski_sum(sq, seg)
    assert set(s.vertices) == {
        (F(0), F(0)),
        (F(3), F(0)),
        (F(0), F(1)),
        (F(3), F(1)),
    }


def test_support_value():
    vp = PH.vertices(cube_h(2))
    assert PH.support_value(vp, (F(1), F(1))) == F(2)
    assert PH.support_value(vp, (F(-1), F(0))) == F(0)


def test_to_hrep_roundtrip_square():
    vp = PH.vertices(cube_h(2))
    h = PH.to_hrep(vp)
    assert set(PH.vertices(h).vertices) == set(vp.vertices)


def test_to_hrep_lower_dimensional_segment():
    seg = PH.VPolytope(((F(0), F(0)), (F(1), F(1))))
    h = PH.to_hrep(seg)
    assert set(PH.vertices(h).vertices) == set(seg.vertices)


def test_canonical_hrep_invariance():
    h = cube_h(2)
    # same square with scaled rows in reversed order
    normals = tuple(tuple(3 * c for c in row) for row in reversed(h.normals))
    offsets = tuple(3 * c for c in reversed(h.offsets))
    h2 = PH.HPolyhedron(normals, offsets, 2)
    assert PH.canonical_hrep(h) == PH.canonical_hrep(h2)
    assert PH.canonical_hrep(h) != PH.canonical_hrep(simplex_h(2))


def test_volume_simplices_and_cubes():
    for d in (1, 2, 3, 4):
        assert PH.volume(PH.vertices(cube_h(d))) == 1
        assert PH.volume(PH.vertices(simplex_h(d))) == F(1, math.factorial(d))


def test_volume_lower_dimensional_is_zero():
    seg = PH.VPolytope(((F(0), F(0)), (F(1), F(0))))
    assert PH.volume(seg) == 0


def test_triangulate_partitions_volume():
    # hexagon: triangulation volumes must add up to the polygon area
    pts = [(F(2), F(0)), (F(1), F(2)), (F(-1), F(2)), (F(-2), F(0)), (F(-1), F(-2)), (F(1), F(-2))]
    vp = PH.VPolytope(tuple(sorted(pts)))
    total = F(0)
    for simplex in PH.triangulate(vp):
        m = [sub(p, simplex[0]) for p in simplex[1:]]
        total += abs(m[0][0] * m[1][1] - m[0][1] * m[1][0]) / 2
    assert total == PH.volume(vp) == F(12)


def test_squared_distance_point_cases():
    seg = PH.VPolytope(((F(1), F(0)), (F(2), F(0))))
    # distance from ker(x axis functional)... use forms = [e0]: kernel is the y axis
    d2 = PH.squared_distance([(F(1), F(0))], seg)
    assert d2 == F(1)
    through = PH.VPolytope(((F(-1), F(1)), (F(1), F(1))))
    assert PH.squared_distance([(F(1), F(0))], through) == F(0)


def test_squared_distance_weighted_inner():
    # |.|^2 = 2x^2 with inner = diag(2,1): kernel of e0 to the point (3,0)
    pt = PH.VPolytope(((F(3), F(0)),))
    inner = ((F(2), F(0)), (F(0), F(1)))
    assert PH.squared_distance([(F(1), F(0))], pt, inner=inner) == F(18)


def closed_form_exp_cube(mu):
    out = 1.0
    for m in mu:
        out *= (math.exp(m) - 1) / m if m else 1.0
    return out


def test_integrate_exp_oracle_closed_forms():
    vp1 = PH.vertices(cube_h(1))
    assert abs(PH.integrate_exp_oracle(vp1, (F(1),)) - (math.e - 1)) < 1e-12
    vp2 = PH.vertices(cube_h(2))
    got = PH.integrate_exp_oracle(vp2, (F(1), F(2)))
    assert abs(got - closed_form_exp_cube([1.0, 2.0])) < 1e-12
    # standard 2-simplex with mu = (1, 0): integral of e^x = e - 2
    vps = PH.vertices(simplex_h(2))
    assert abs(PH.integrate_exp_oracle(vps, (F(1), F(0))) - (math.e - 2)) < 1e-12


def test_integrate_exp_oracle_zero_mu_is_volume():
    vp = PH.vertices(simplex_h(3))
    assert abs(PH.integrate_exp_oracle(vp, (F(0), F(0), F(0))) - 1 / 6) < 1e-13


def test_mc_integrate_agrees_loosely():
    import random

    vp = PH.vertices(cube_h(2))
    est, err = PH.mc_integrate_exp(vp, (F(1), F(1)), 4000, random.Random(0))
    exact = closed_form_exp_cube([1.0, 1.0])
    assert abs(est - exact) < 5 * err + 0.05


def test_json_roundtrips():
    h = simplex_h(2)
    h2 = PH.h_from_json(PH.h_to_json(h))
    assert h2.normals == h.normals and h2.offsets == h.offsets and h2.dim == h.dim
    vp = PH.vertices(h)
    vp2 = PH.v_from_json(PH.v_to_json(vp))
    assert vp2.vertices == vp.vertices
    assert json.loads(PH.v_to_json(vp))  # plain JSON, no custom types


def test_off_output_shape():
    text = PH.to_off(PH.vertices(cube_h(3)))
    lines = text.strip().splitlines()
    assert lines[0] == "OFF"
    nv, nf, _ = (int(c) for c in lines[1].split())
    assert nv == 8 and nf == 6


def test_parse_fraction():
    assert PH.parse_fraction("3/4") == F(3, 4)
    assert PH.parse_fraction("-2") == F(-2)
    with pytest.raises(ValueError):
        PH.parse_fraction("a/b")


@given(st.lists(st.tuples(fracs, fracs), min_size=1, max_size=6))
def test_extreme_points_reproduce_hull(pts):
    ext = PH.extreme_points(pts)
    assert set(ext) <= set(pts)
    for p in pts:
        assert PH.in_hull(ext, p)
