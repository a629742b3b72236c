import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special as sps

from robiniso.ball import (
    BallProblem,
    ball_eigenvalue,
    ball_monotonicity_check,
    ball_shape_derivative_closed_form,
    ball_volume,
    radial_shooting_oracle,
    shooting_eigenvalue,
    sphere_area,
)


def reference_lambda(n, alpha, r):
    """Independent root of k I_{ν+1}(kr) / I_ν(kr) = α using scipy."""
    nu = n / 2 - 1
    f = lambda k: k * sps.ive(nu + 1, k * r) / sps.ive(nu, k * r) - alpha
    from scipy.optimize import brentq

    k = brentq(f, alpha, alpha + n / r + 1.0, xtol=1e-15, rtol=1e-15)
    return -k * k


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_against_independent_root(n, alpha, r):
    res = ball_eigenvalue(BallProblem(n, alpha, r))
    assert res.lam == pytest.approx(reference_lambda(n, alpha, r), rel=1e-12)
    assert res.sign_changes == 1
    assert abs(res.residual) < 1e-10


@pytest.mark.parametrize("n, alpha, r", [(2, 1.0, 1.0), (3, 0.5, 2.0), (4, 2.0, 0.5)])
def test_shooting_oracle_agrees(n, alpha, r):
    p = BallProblem(n, alpha, r)
    assert shooting_eigenvalue(p) == pytest.approx(ball_eigenvalue(p).lam, rel=1e-8)


def test_shooting_step_halving():
    p = BallProblem(2, 1.0, 1.0)
    a = shooting_eigenvalue(p, steps=2048)
    b = shooting_eigenvalue(p, steps=4096)
    assert abs(a - b) < 1e-10


def test_oracle_residual_changes_sign_at_eigenvalue():
    p = BallProblem(3, 1.0, 1.0)
    lam = ball_eigenvalue(p).lam
    lo = radial_shooting_oracle(p, lam - 1e-3)
    hi = radial_shooting_oracle(p, lam + 1e-3)
    assert lo * hi < 0


def test_n3_closed_form():
    # n = 3: u = sinh(kρ)/ρ, Robin condition gives k coth(kr) - 1/r = α
    from scipy.optimize import brentq

    alpha, r = 1.0, 1.0
    k = brentq(lambda k: k / math.tanh(k * r) - 1 / r - alpha, 1e-6, 10.0, xtol=1e-15)
    assert ball_eigenvalue(BallProblem(3, alpha, r)).lam == pytest.approx(-k * k, rel=1e-12)


def test_norm_closed_form_against_quadrature():
    res = ball_eigenvalue(BallProblem(2, 1.0, 1.5))
    val, _ = integrate.quad(lambda s: 2 * math.pi * s * res.profile(s) ** 2, 0, 1.5, epsabs=1e-13, epsrel=1e-13)
    assert res.norm_sq == pytest.approx(val, rel=1e-10)


def test_profile_satisfies_robin_condition():
    for n in (2, 3, 4):
        res = ball_eigenvalue(BallProblem(n, 1.3, 0.8))
        assert res.profile_derivative(0.8) == pytest.approx(1.3 * res.profile(0.8), rel=1e-10)
        assert res.profile(0.0) == 1.0


def test_dirichlet_energy_identity():
    res = ball_eigenvalue(BallProblem(2, 1.0, 1.0))
    val, _ = integrate.quad(lambda s: 2 * math.pi * s * res.profile_derivative(s) ** 2, 0, 1, epsrel=1e-12)
    assert res.dirichlet_energy == pytest.approx(val, rel=1e-9)


def test_large_radius_limit():
    roots = [math.sqrt(-ball_eigenvalue(BallProblem(2, 1.0, r)).lam) for r in (5, 10, 20, 50)]
    assert all(b < a for a, b in zip(roots, roots[1:]))
    assert 1.0 < roots[-1] < 1.1


def test_monotonicity_report():
    rep = ball_monotonicity_check(2, 1.0, np.geomspace(0.1, 10, 20))
    assert rep.passed and rep.lam_increasing and rep.y_increasing
    assert not rep.violations


def test_monotonicity_rejects_unsorted_radii():
    with pytest.raises(ValueError):
        ball_monotonicity_check(2, 1.0, [1.0, 0.5])


@pytest.mark.parametrize("bad", [dict(n=1, alpha=1.0, r=1.0), dict(n=2, alpha=0.0, r=1.0), dict(n=2, alpha=1.0, r=-1.0)])
def test_invalid_problem(bad):
    with pytest.raises(ValueError):
        BallProblem(**bad)


def test_shape_derivative_closed_form_matches_radius_difference():
    for n, alpha, r in [(2, 1.0, 1.0), (3, 2.0, 0.7)]:
        res = ball_eigenvalue(BallProblem(n, alpha, r))
        d = 1e-4
        fd = (ball_eigenvalue(BallProblem(n, alpha, r + d)).lam - ball_eigenvalue(BallProblem(n, alpha, r - d)).lam) / (2 * d)
        closed = ball_shape_derivative_closed_form(res, sphere_area(n, r))
        assert closed == pytest.approx(fd, rel=1e-6)
        assert closed > 0


def test_measures():
    assert sphere_area(2, 2.0) == pytest.approx(4 * math.pi)
    assert ball_volume(3, 1.0) == pytest.approx(4 * math.pi / 3)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.floats(0.1, 5.0), st.floats(0.1, 10.0))
def test_sign_inequality_and_bounds(n, alpha, r):
    res = ball_eigenvalue(BallProblem(n, alpha, r))
    # λ + α² + α(n-1)/r < 0 and λ below the constant-trial value -αn/r
    assert res.lam + alpha**2 + alpha * (n - 1) / r < 0
    assert res.lam < -alpha * n / r
    assert res.k > alpha


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3]), st.floats(0.2, 3.0), st.floats(0.2, 5.0))
def test_scaling_relation(n, alpha, r):
    # λ(B_r; α) = λ(B_1; αr) / r²
    a = ball_eigenvalue(BallProblem(n, alpha, r)).lam
    b = ball_eigenvalue(BallProblem(n, alpha * r, 1.0)).lam
    assert a == pytest.approx(b / r**2, rel=1e-10)
