import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robiniso.ball import BallProblem, ball_eigenvalue
from robiniso.domains import DomainSpec
from robiniso.fem import _matrices, field_integrals, robin_principal_eigen
from robiniso.mesh import triangulate
from robiniso.transplant import (
    GREEN_GAMMA,
    PreconditionError,
    RangeError,
    ball_integral,
    green_function,
    harmonic_center,
    harmonic_radius,
    level_set_measures,
    mesh_allowance,
    rayleigh_quotient,
    superlevel_fractions,
    theorem1_check,
    transplant,
    verify_capacity_equality,
    verify_lemma_cap2,
    verify_transplant_bounds,
)


def test_disk_regular_part_vanishes(disk_mesh):
    g = green_function(disk_mesh, (0.0, 0.0))
    assert np.abs(g.H_field.values).max() < 1e-2
    assert g.harmonic_radius_at_pole == pytest.approx(1.0, abs=1e-2)
    assert g.green_gamma == GREEN_GAMMA == pytest.approx(1 / (2 * math.pi))


def test_disk_radius_R():
    m = triangulate(DomainSpec.disk(2.5), 0.1)
    g = green_function(m, (0.0, 0.0))
    assert g.harmonic_radius_at_pole == pytest.approx(2.5, rel=1e-2)
    # closed form G = ln(R/|x|) / 2π away from the pole
    rr = np.hypot(*m.points.T)
    mask = rr > 0.5
    np.testing.assert_allclose(g.G_field.values[mask], np.log(2.5 / rr[mask]) / (2 * math.pi), atol=1e-3)


def test_green_invariants(ellipse_green):
    g = ellipse_green
    m = g.mesh
    G = g.G_field.values
    assert np.all(G[m.is_boundary] == 0.0)
    assert G.min() >= -1e-8
    # H is discrete harmonic at interior nodes
    K, _, _ = _matrices(m)
    r = K @ g.H_field.values
    assert np.abs(r[~m.is_boundary]).max() < 1e-10
    assert g.harmonic_radius_at_pole == pytest.approx(math.exp(-g.H_field(g.pole)), rel=1e-14)


def test_pole_near_boundary_rejected(disk_mesh):
    with pytest.raises(PreconditionError):
        green_function(disk_mesh, (0.95, 0.0))


def test_harmonic_center_disk(disk_mesh):
    y, r = harmonic_center(disk_mesh)
    assert np.hypot(*y) < 5e-2
    assert r == pytest.approx(1.0, abs=1e-2)


def test_harmonic_center_ellipse(ellipse_mesh):
    y, r = harmonic_center(ellipse_mesh)
    assert np.hypot(*y) < 5e-2
    # the inscribed unit disk and |B_r| <= |Ω| bound the radius
    assert 1.0 < r < math.sqrt(2.0)
    assert math.pi * r * r <= ellipse_mesh.area + ellipse_mesh.h**2 * ellipse_mesh.perimeter


def test_harmonic_radius_decreases_towards_boundary(ellipse_mesh):
    y, r = harmonic_center(ellipse_mesh)
    target = np.array([1.98, 0.0])
    vals = [harmonic_radius(ellipse_mesh, y + s * (target - y)) for s in np.linspace(0.0, 1.0, 12)]
    assert vals[0] == pytest.approx(r, rel=1e-12)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert harmonic_radius(ellipse_mesh, (3.0, 0.0)) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 1.5))
def test_superlevel_fraction_linear_triangle(t):
    # u = x on the reference triangle: |{x >= t}| / |T| = (1 - t)² for t in [0, 1]
    vals = np.array([0.0, 1.0, 0.0])
    f = superlevel_fractions(vals, np.array([[0, 1, 2]]), t)[0]
    expect = 1.0 if t <= 0 else (0.0 if t >= 1 else (1 - t) ** 2)
    assert f == pytest.approx(expect, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.floats(-2.5, 2.5))
def test_superlevel_fraction_complement(vals, t):
    # fractions of {u >= t} and {-u >= -t} sum to one away from ties
    vals = np.array(vals)
    tri = np.array([[0, 1, 2]])
    a = superlevel_fractions(vals, tri, t)[0]
    b = superlevel_fractions(-vals, tri, -t)[0]
    assert 0.0 <= a <= 1.0
    if np.min(np.abs(vals - t)) > 1e-9:
        assert a + b == pytest.approx(1.0, abs=1e-9)


def test_level_sets_on_disk(disk_green):
    t = np.array([0.0, 0.02, 0.05, 0.1, 0.2])
    table = level_set_measures(disk_green, t)
    assert table.m_Omega[0] == pytest.approx(disk_green.mesh.area, abs=1e-10)
    assert table.m_Ball[0] == pytest.approx(math.pi * table.r_Omega**2)
    np.testing.assert_allclose(table.m_Omega[1:], math.pi * np.exp(-4 * math.pi * t[1:]), rtol=2e-2)
    assert np.all(np.diff(table.m_Omega) <= 0) and np.all(np.diff(table.m_Ball) <= 0)
    assert table.gamma_ratio >= 1 - 1e-3


def test_level_sets_vanish(ellipse_green):
    table = level_set_measures(ellipse_green, np.geomspace(1e-3, 3.0, 30))
    assert np.all(np.diff(table.m_Omega) <= 0)
    assert table.m_Omega[-1] < 1e-6


def test_level_set_csv(tmp_path, ellipse_green):
    table = level_set_measures(ellipse_green, [0.1, 0.2])
    table.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,m_Omega,m_Ball,bound,margin"
    assert float(lines[1].split(",")[0]) == 0.1


@pytest.mark.parametrize("t", [0.03, 0.06, 0.1, 0.15, 0.2])
def test_capacity_disk(disk_green, t):
    cd, cb, gap = verify_capacity_equality(disk_green, t)
    assert cb == pytest.approx(1.0 / t, rel=1e-12)
    assert gap < 2e-2


@pytest.mark.parametrize("t", [0.05, 0.1, 0.15])
def test_capacity_ellipse(ellipse_green, t):
    assert verify_capacity_equality(ellipse_green, t)[2] < 5e-2


def test_capacity_under_resolved(disk_green):
    with pytest.raises(RangeError):
        verify_capacity_equality(disk_green, 2.0)


def test_lemma_on_ellipse_and_disk(ellipse_green, disk_green):
    t = np.concatenate([[0.0], np.geomspace(1e-3, 0.5, 20)])
    res = verify_lemma_cap2(level_set_measures(ellipse_green, t), mesh_allowance(ellipse_green.mesh))
    assert res["passed"]
    # the t = 0 row is the identity |Ω| = γⁿ|B|
    assert res["rows"][0]["margin"] == pytest.approx(0.0, abs=1e-10)
    # the bound holds here even without any allowance
    assert res["worst_margin"] > -1e-3
    d = verify_lemma_cap2(level_set_measures(disk_green, t), mesh_allowance(disk_green.mesh))
    assert d["passed"]
    assert max(abs(r["margin"]) for r in d["rows"]) < 1e-2


def test_transplant_identity_on_disk(disk_green):
    b = ball_eigenvalue(BallProblem(2, 1.0, disk_green.harmonic_radius_at_pole))
    U = transplant(b.profile, disk_green)
    exact = b.profile(np.hypot(*disk_green.mesh.points.T))
    assert np.abs(U.values - exact).max() < 1e-2


def test_transplant_constants_and_boundary(ellipse_green):
    U = transplant(lambda s: np.full_like(s, 3.0), ellipse_green)
    assert np.all(U.values == 3.0)
    V = transplant(lambda s: s**2, ellipse_green)
    vb = V.values[ellipse_green.mesh.is_boundary]
    assert np.ptp(vb) == 0.0


def test_dirichlet_energy_identity(ellipse_green):
    r = ellipse_green.harmonic_radius_at_pole
    b = ball_eigenvalue(BallProblem(2, 1.0, r))
    U = transplant(b.profile, ellipse_green)
    grad_B = ball_integral(lambda s: b.profile_derivative(s) ** 2, r)
    assert field_integrals(U, np.square)[2] == pytest.approx(grad_B, rel=2e-2)


def test_ball_integral():
    assert ball_integral(lambda s: np.ones_like(s), 2.0) == pytest.approx(4 * math.pi, rel=1e-14)
    assert ball_integral(lambda s: s**2, 1.0) == pytest.approx(math.pi / 2, rel=1e-14)


def test_sandwich_on_disk(disk_green):
    b = ball_eigenvalue(BallProblem(2, 1.0, disk_green.harmonic_radius_at_pole))
    res = verify_transplant_bounds(b.profile, disk_green, np.square)
    assert res["passed"]
    assert abs(res["domain_integral"] - res["ball_integral"]) < res["allowance"]


def test_sandwich_with_constant_f(ellipse_green):
    b = ball_eigenvalue(BallProblem(2, 1.0, ellipse_green.harmonic_radius_at_pole))
    res = verify_transplant_bounds(b.profile, ellipse_green, lambda s: np.ones_like(s))
    assert res["passed"]
    assert res["domain_integral"] == pytest.approx(ellipse_green.mesh.area, rel=1e-12)
    assert res["upper_bound"] == pytest.approx(ellipse_green.mesh.area, rel=1e-12)


def test_sandwich_rejects_decreasing_profile(ellipse_green):
    with pytest.raises(PreconditionError):
        verify_transplant_bounds(lambda s: 2.0 - s, ellipse_green, np.square)


def test_upper_bound_direction_for_increasing_profiles(ellipse_green):
    # m_B <= m_Ω <= γⁿ m_B and a layer-cake argument give, for φ increasing
    # in the radius and f increasing, ∫_Ω f(U) >= γⁿ ∫_B f(φ)
    b = ball_eigenvalue(BallProblem(2, 1.0, ellipse_green.harmonic_radius_at_pole))
    res = verify_transplant_bounds(b.profile, ellipse_green, np.square)
    assert res["lower_passed"]
    assert res["reverse_upper_passed"]
    assert res["domain_integral"] > res["upper_bound"]


@pytest.mark.parametrize("phi", [lambda s: np.exp(-s * s), lambda s: 2.0 - s, lambda s: 1.0 / (1.0 + s)])
def test_upper_bound_for_decreasing_profiles(ellipse_green, phi):
    # with φ decreasing, f∘φ increases along G and γⁿ∫_B f(φ) bounds from above
    r = ellipse_green.harmonic_radius_at_pole
    m = ellipse_green.mesh
    gamma_n = m.area / (math.pi * r * r)
    dom = field_integrals(transplant(phi, ellipse_green), np.square)[0]
    ball = ball_integral(lambda s: phi(s) ** 2, r)
    assert ball - 1e-2 <= dom <= gamma_n * ball


def test_rayleigh_quotient_of_eigenfunction(disk_mesh):
    eig = robin_principal_eigen(disk_mesh, 1.0)
    q = rayleigh_quotient(eig.field, 1.0)
    # boundary term by 2-point Gauss equals the exact P1 boundary mass
    assert q == pytest.approx(eig.lam, rel=1e-10)


def test_theorem1_disk_equality():
    rep = theorem1_check(DomainSpec.disk(1.0), 1.0, 0.05)
    assert rep.passed
    assert abs(rep.quantities["relative_margin"]) < 1e-2


@pytest.mark.parametrize(
    "spec", [DomainSpec.ellipse(2.0, 1.0), DomainSpec.star(1.0, (0.0, 0.0, 0.3))], ids=["ellipse", "star"]
)
def test_theorem1_strict(spec):
    rep = theorem1_check(spec, 1.0, 0.05)
    assert rep.passed
    main = rep["|Ω|λ(Ω) <= |B|λ(B)"]
    assert main.margin > rep.quantities["allowance"]
    q = rep.quantities
    assert q["transplant_rayleigh"] >= q["lam_Omega"]
    assert q["lam_Omega"] < q["constant_trial_bound"]
    names = {a.name for a in rep.assertions}
    assert {"2√(π|Ω|) <= |∂Ω|", "2π r_Ω <= 2√(π|Ω|)", "λ(Ω) <= λ(B_R)"} <= names
    assert rep.wall_time > 0
