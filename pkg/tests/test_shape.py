import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robiniso.ball import BallProblem, ball_eigenvalue, ball_shape_derivative_closed_form
from robiniso.domains import DomainSpec
from robiniso.fem import robin_principal_eigen
from robiniso.mesh import triangulate
from robiniso.shape import (
    VAR1_VARIANTS,
    PerturbationField,
    boundary_geometry,
    eigen_derivative_check,
    eigen_shape_derivative,
    perturbed_spec,
    steklov_first_variation,
    steklov_variation_check,
    volume_flux,
)
from robiniso.steklov import BoundaryWeight, EnergyProblem, concave_smooth, minimize_energy, quadratic_sink


@pytest.fixture(scope="module")
def disk_setup(disk_mesh):
    return disk_mesh, boundary_geometry(disk_mesh), robin_principal_eigen(disk_mesh, 1.0)


def test_geometry_of_circle():
    m = triangulate(DomainSpec.disk(2.0), 0.1)
    g = boundary_geometry(m)
    np.testing.assert_allclose(g.curvature, 0.5, rtol=1e-10)
    assert g.weight.sum() == pytest.approx(4 * math.pi, rel=1e-8)
    np.testing.assert_allclose(g.er_dot_nu, 1.0, rtol=1e-12)


def test_geometry_weights_match_perimeter(ellipse_mesh):
    g = boundary_geometry(ellipse_mesh)
    assert g.weight.sum() == pytest.approx(ellipse_mesh.spec.perimeter(), rel=1e-8)


def test_geometry_needs_star_mesh():
    with pytest.raises(ValueError):
        boundary_geometry(triangulate(DomainSpec.square(1.0), 0.1))


def test_volume_flux(disk_setup):
    _, g, _ = disk_setup
    assert abs(volume_flux(g, PerturbationField.mode(1))) < 1e-12
    assert volume_flux(g, PerturbationField(c0=1.0)) == pytest.approx(2 * math.pi, rel=1e-8)


@pytest.mark.parametrize("pert", [PerturbationField(c0=0.3, cos=(0.1, 0.5)), PerturbationField(sin=(0.2, 0.0, 0.4))])
def test_volume_flux_against_area_difference(ellipse_mesh, pert):
    spec = ellipse_mesh.spec
    flux = volume_flux(boundary_geometry(ellipse_mesh), pert)
    for t in (1e-3, 1e-4):
        fd = (perturbed_spec(spec, pert, t).area() - spec.area()) / t
        assert abs(fd - flux) < 2 * t * 10 + 1e-6


def test_perturbed_spec():
    d = DomainSpec.disk(1.0)
    assert perturbed_spec(d, PerturbationField.mode(2), 0.0) == d
    grown = perturbed_spec(d, PerturbationField(c0=1.0), 0.25)
    assert grown.R == pytest.approx(1.25) and not any(grown.cos)
    with pytest.raises(ValueError):
        perturbed_spec(d, PerturbationField(c0=1.0), 10.0)
    with pytest.raises(ValueError):
        perturbed_spec(DomainSpec.square(1.0), PerturbationField(c0=1.0), 0.1)


def test_perturbed_radius_is_shifted():
    e = DomainSpec.ellipse(2.0, 1.0)
    p = PerturbationField(c0=0.1, cos=(0.0, 0.3), sin=(0.2,))
    th = np.linspace(0, 2 * np.pi, 17)
    np.testing.assert_allclose(perturbed_spec(e, p, 0.05).radius(th), e.radius(th) + 0.05 * p(th), rtol=1e-12)


def test_disk_volume_preserving_derivative_vanishes(disk_setup):
    m, g, eig = disk_setup
    for k in (1, 2, 3):
        d = eigen_shape_derivative(m, g, 1.0, eig, PerturbationField.mode(k))
        assert abs(d) < 1e-5  # the dilation derivative is about 1.9


def test_disk_dilation_matches_closed_form(disk_setup):
    m, g, eig = disk_setup
    d = eigen_shape_derivative(m, g, 1.0, eig, PerturbationField(c0=1.0))
    closed = ball_shape_derivative_closed_form(ball_eigenvalue(BallProblem(2, 1.0, 1.0)), 2 * math.pi)
    assert d == pytest.approx(closed, rel=2e-2)


def test_linearity(disk_setup, ellipse_mesh):
    mesh = ellipse_mesh
    g = boundary_geometry(mesh)
    eig = robin_principal_eigen(mesh, 1.0)
    a, b = PerturbationField(cos=(0.0, 1.0)), PerturbationField(c0=0.4, sin=(0.3,))
    d = lambda p: eigen_shape_derivative(mesh, g, 1.0, eig, p)
    assert d(a + b) == pytest.approx(d(a) + d(b), rel=1e-8, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=4))
def test_sign_for_volume_increasing_disk_perturbations(c0, cos):
    # on the disk the derivative is a positive multiple of the flux
    m = triangulate(DomainSpec.disk(1.0), 0.05)
    g = boundary_geometry(m)
    eig = robin_principal_eigen(m, 1.0)
    pert = PerturbationField(c0=c0, cos=tuple(cos))
    assert volume_flux(g, pert) > 0
    assert eigen_shape_derivative(m, g, 1.0, eig, pert) > 0


def test_ellipse_against_remeshed_differences():
    rep = eigen_derivative_check(DomainSpec.ellipse(2.0, 1.0), 1.0, PerturbationField.mode(2), 0.05)
    assert rep.passed
    assert rep.quantities["relative_error"] < 1e-2
    m = rep.quantities["forward_mismatch"]
    assert m[0] / m[1] >= 1.5


def test_steklov_variants_on_disk_with_radial_data(disk_mesh):
    g = boundary_geometry(disk_mesh)
    G = quadratic_sink(1.0)
    rho = BoundaryWeight(1.0)
    u, _, _ = minimize_energy(EnergyProblem(disk_mesh, G, 1.0, rho))
    vals = steklov_first_variation(disk_mesh, g, u, G.G, 1.0, rho, PerturbationField.mode(2))
    assert set(vals) == set(VAR1_VARIANTS)
    assert max(abs(v) for v in vals.values()) < 1e-3


def test_steklov_variants_agree_without_forcing(ellipse_mesh):
    # with μ = 0 every μ-term drops and the variants coincide
    g = boundary_geometry(ellipse_mesh)
    G = quadratic_sink(1.0)
    rho = BoundaryWeight(1.0, (0.3, 0.0), 0.2)
    u, _, _ = minimize_energy(EnergyProblem(ellipse_mesh, G, 0.0, rho))
    vals = steklov_first_variation(ellipse_mesh, g, u, G.G, 0.0, rho, PerturbationField.mode(2))
    assert len(set(vals.values())) == 1
    assert abs(vals["printed"]) < 1e-12


def test_steklov_ellipse_quadratic_identifies_variant():
    rep = steklov_variation_check(DomainSpec.ellipse(2.0, 1.0), quadratic_sink(1.0), 1.0,
                                  BoundaryWeight(1.0, (0.3, 0.0), 0.2), PerturbationField.mode(2), 0.05)
    assert rep.passed
    assert rep.quantities["matching_variant"] == "derived"


def test_steklov_ellipse_concave_identifies_variant():
    rep = steklov_variation_check(DomainSpec.ellipse(2.0, 1.0), concave_smooth(4.0, 0.5), 1.0,
                                  BoundaryWeight(-1.0, (0.2, 0.0), 0.1), PerturbationField(c0=0.2, cos=(0.0, 1.0)), 0.05)
    assert rep.passed
    assert rep.quantities["matching_variant"] == "derived"
