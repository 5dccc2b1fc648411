import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from r4curv import fixtures
from r4curv.core import analyze, nu_second_form
from r4curv.dsl import parse_surface_file
from r4curv.fields import (
    DirectionSet,
    TangentDirection,
    asymptotic_coefficients,
    asymptotic_directions,
    axial_directions_extremal,
    axial_directions_quartic,
    axial_quartic_coefficients,
    binary_form_roots,
    mean_directional_coefficients,
    mean_directional_directions,
    nu_principal_directions,
    set_angle_distance,
    solve_binary_quadratic,
)

from conftest import random_points

PERTURBED = parse_surface_file("""\
name = perturbed
x = u + 0.3*v^2
y = v + 0.2*u*v
z = 0.7*u^2 - 0.4*u*v + 1.1*v^2 + 0.3*u^3
w = -0.5*u^2 + 0.9*u*v + 0.2*v^2 + 0.4*v^3*u
u in [-1, 1] open
v in [-1, 1] open
""")

AXES = {TangentDirection.of(1, 0), TangentDirection.of(0, 1)}
DIAGONALS = {TangentDirection.of(1, 1), TangentDirection.of(1, -1)}


def same(dirs, expected, tol=1e-12):
    return set_angle_distance(list(dirs), list(expected)) < tol and len(dirs) == len(expected)


def poly_residual(coeffs, d):
    n = len(coeffs) - 1
    val = sum(c * d.du ** (n - i) * d.dv ** i for i, c in enumerate(coeffs))
    return abs(val) / max(np.max(np.abs(coeffs)), 1e-300)


# -- tangent directions ------------------------------------------------------

@given(st.floats(-10, 10), st.floats(-10, 10))
def test_direction_canonical_form(du, dv):
    if math.hypot(du, dv) < 1e-6:
        return
    d = TangentDirection.of(du, dv)
    assert d.du ** 2 + d.dv ** 2 == pytest.approx(1.0, abs=1e-15)
    assert d.du > 0 or (d.du == 0 and d.dv > 0)
    assert TangentDirection.of(-du, -dv) == d


def test_zero_direction_rejected():
    with pytest.raises(ValueError):
        TangentDirection.of(0.0, 0.0)


def test_direction_set_limits():
    four = tuple(TangentDirection.of(1, k) for k in range(4))
    with pytest.raises(ValueError):
        DirectionSet(four[:3])
    assert len(DirectionSet(four, kind="quartet")) == 4
    with pytest.raises(ValueError):
        DirectionSet(four[:1], degenerate=True)


# -- quadratic equations -----------------------------------------------------

def test_quadratic_examples():
    assert same(solve_binary_quadratic(0, -1, 0), AXES)
    assert same(solve_binary_quadratic(-1, 0, 1), DIAGONALS)
    none = solve_binary_quadratic(1, 0, 1)
    assert len(none) == 0 and not none.degenerate
    assert solve_binary_quadratic(0, 0, 0).degenerate


def test_quadratic_deflation_of_vertical_root():
    # a = 0 leaves [1:0] as a root, c = 0 leaves [0:1]
    ds = solve_binary_quadratic(0.0, 2.0, 3.0)
    assert same(ds, {TangentDirection.of(1, 0), TangentDirection.of(3, -2)})
    ds = solve_binary_quadratic(3.0, 2.0, 0.0)
    assert same(ds, {TangentDirection.of(0, 1), TangentDirection.of(-2, 3)})


def test_quadratic_double_root():
    ds = solve_binary_quadratic(1.0, -2.0, 1.0)
    assert len(ds) == 1 and ds.multiplicities == (2,)
    assert same(ds, {TangentDirection.of(1, 1)})


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_quadratic_root_residual(a, b, c):
    if max(abs(a), abs(b), abs(c)) < 1e-3:
        return
    ds = solve_binary_quadratic(a, b, c)
    assert len(ds) <= 2
    for d in ds:
        assert poly_residual([a, b, c], d) < 1e-9
    if b * b - 4 * a * c > 1e-6 * max(a * a, b * b, c * c):
        assert len(ds) == 2


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_quartic_roots_from_factors(angles):
    # product of four linear forms with known roots
    dirs = [TangentDirection.of(math.cos(t), math.sin(t)) for t in angles]
    for i in range(4):
        for j in range(i):
            if min(abs(dirs[i].angle - dirs[j].angle), math.pi - abs(dirs[i].angle - dirs[j].angle)) < 1e-2:
                return
    coeffs = np.array([1.0])
    for d in dirs:
        # dv*du - du*dv vanishes along d
        coeffs = np.convolve(coeffs, [d.dv, -d.du])
    found, mults = binary_form_roots(coeffs)
    assert sum(mults) == 4
    assert set_angle_distance(found, dirs) < 1e-6


# -- fixtures ----------------------------------------------------------------

def test_clifford_equations(surfaces):
    b = analyze(surfaces["clifford"], 0.3, 0.7).forms
    assert np.allclose(asymptotic_coefficients(b), (0, -1, 0), atol=1e-12)
    assert np.allclose(mean_directional_coefficients(b), (-1, 0, 1), atol=1e-12)
    A = np.array(axial_quartic_coefficients(b))
    assert np.allclose(A / A[1] * 8, (0, 8, 0, -8, 0), atol=1e-12)
    asym = asymptotic_directions(b)
    assert same(asym, AXES)
    d1, d2 = asym.directions
    assert abs(d1.i_inner(d2, *b.first)) < 1e-12
    assert same(mean_directional_directions(b), DIAGONALS)
    q = axial_directions_quartic(b)
    assert same(q, AXES | DIAGONALS)
    assert same(q.large, AXES)
    assert same(q.small, DIAGONALS)


def test_clifford_extremal_angles(surfaces):
    f = analyze(surfaces["clifford"], 1.1, -0.4).frame
    x = axial_directions_extremal(f)
    assert same(x, AXES | DIAGONALS, 1e-9)
    assert same(x.large, AXES, 1e-9)


def test_zsquared_origin(surfaces):
    b = analyze(surfaces["zsquared"], 0.0, 0.0).forms
    assert np.allclose(np.abs(asymptotic_coefficients(b)), (4, 0, 4), atol=1e-12)
    asym = asymptotic_directions(b)
    assert len(asym) == 0 and not asym.degenerate
    assert mean_directional_directions(b).degenerate
    assert axial_directions_quartic(b).degenerate
    assert axial_directions_extremal(analyze(surfaces["zsquared"], 0.0, 0.0).frame).degenerate


def test_plane_degenerate(surfaces):
    p = analyze(surfaces["plane"], 0.2, -0.3)
    assert asymptotic_directions(p.forms).degenerate
    assert mean_directional_directions(p.forms).degenerate
    assert axial_directions_quartic(p.forms).degenerate
    assert axial_directions_extremal(p.frame).degenerate
    assert nu_principal_directions(p.forms.first, (0.0, 0.0, 0.0)).degenerate


def test_torus_asymptotics_degenerate(surfaces, rng):
    s = surfaces["torus"]
    for u, v in random_points(s, 10, rng):
        assert asymptotic_directions(analyze(s, u, v).forms).degenerate


def test_nu_principal_on_clifford(surfaces):
    p = analyze(surfaces["clifford"], 0.4, 2.0)
    ds = nu_principal_directions(p.forms.first, p.forms.second1)
    assert same(ds, AXES)
    alpha = np.array([math.cos(0.4), math.sin(0.4), math.cos(2.0), math.sin(2.0)])
    sec = nu_second_form(p.frame, -alpha / math.sqrt(2))
    assert np.allclose(sec, (1 / math.sqrt(2), 0, 1 / math.sqrt(2)), atol=1e-12)
    assert nu_principal_directions(p.forms.first, sec).degenerate


# -- quartic against the extremal oracle --------------------------------------

def _agreement_points(rng):
    cases = []
    for u, v in random_points(PERTURBED, 120, rng):
        cases.append((PERTURBED, u, v))
    for name in ("clifford", "torus"):
        s = fixtures.load(name)
        for u, v in random_points(s, 40, rng):
            cases.append((s, u, v))
    return cases


def test_quartic_matches_extremal_oracle(rng):
    bad = []
    for s, u, v in _agreement_points(rng):
        p = analyze(s, u, v)
        q = axial_directions_quartic(p.forms)
        x = axial_directions_extremal(p.frame)
        if q.degenerate:
            continue
        assert len(q) == len(x) == 4
        if not (set_angle_distance(q, x) < 1e-6 and set_angle_distance(q.large, x.large) < 1e-6):
            bad.append((s.name, u, v))
    assert not bad


@pytest.mark.parametrize("radius,ratio", [(1.0, 1.0), (2.5, 1.0), (1.0, 1.7), (3.0, 0.4)])
def test_quartic_on_scaled_clifford(radius, ratio):
    s = fixtures.scaled_clifford(radius, ratio)
    p = analyze(s, 0.7, 1.9)
    q = axial_directions_quartic(p.forms)
    x = axial_directions_extremal(p.frame)
    assert set_angle_distance(q, x) < 1e-6
    assert set_angle_distance(q.large, x.large) < 1e-6


def test_axial_crosses_orthogonal_and_roots_exact(rng):
    for u, v in random_points(PERTURBED, 60, rng):
        b = analyze(PERTURBED, u, v).forms
        q = axial_directions_quartic(b)
        A = axial_quartic_coefficients(b)
        for d in q:
            assert poly_residual(A, d) < 1e-9
        scale = max(b.E, b.G)
        for d1, d2 in q.crosses:
            assert abs(d1.i_inner(d2, *b.first)) < 1e-8 * scale
        for ds, coeffs in ((asymptotic_directions(b), asymptotic_coefficients(b)),):
            for d in ds:
                assert poly_residual(coeffs, d) < 1e-9
        B1, B2, B3 = mean_directional_coefficients(b)
        for d in mean_directional_directions(b):
            assert poly_residual([B1, 2 * B2, B3], d) < 1e-9


def test_clifford_quartet_is_asymptotic_union_mean(rng):
    s = fixtures.load("clifford")
    for u, v in random_points(s, 20, rng):
        b = analyze(s, u, v).forms
        union = list(asymptotic_directions(b)) + list(mean_directional_directions(b))
        q = axial_directions_quartic(b)
        assert len(q) == 4
        assert set_angle_distance(q, union) < 1e-12
