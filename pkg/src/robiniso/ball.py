"""Principal Robin eigenvalue of a ball for a positive boundary parameter.

On ``B_r`` in ``R^n`` the principal eigenfunction of ``Δu + λu = 0``,
``∂_ν u = α u`` is radial, ``u(ρ) ∝ ρ^{-ν} I_ν(kρ)`` with ``ν = (n-2)/2`` and
``λ = -k²``. The boundary condition becomes the scalar equation

    k I'_ν(kr) = (α + (n-2)/(2r)) I_ν(kr),

solved here by bisection. :func:`radial_shooting_oracle` integrates the radial
ODE directly and serves as an independent check.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit

from .special import (
    bessel_i,
    bessel_ie,
    bessel_ie_prime,
    bessel_i_prime,
    order_for_dimension,
)

__all__ = [
    "BallProblem",
    "BallEigenResult",
    "ConvergenceError",
    "ball_eigenvalue",
    "radial_shooting_oracle",
    "shooting_eigenvalue",
    "ball_monotonicity_check",
    "ball_shape_derivative_closed_form",
    "sphere_area",
    "ball_volume",
]


class ConvergenceError(RuntimeError):
    """Raised when a root bracket cannot be established."""


def sphere_area(n, r=1.0):
    """Surface measure of the sphere of radius ``r`` in ``R^n``."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0) * r ** (n - 1)


def ball_volume(n, r=1.0):
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * r**n


@dataclass(frozen=True)
class BallProblem:
    n: int
    alpha: float
    r: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"r must be positive, got {self.r!r}")

    @property
    def nu(self):
        return order_for_dimension(self.n)

    @property
    def slope(self):
        """Right-hand coefficient ``α + (n-2)/(2r)``."""
        return self.alpha + self.nu / self.r


@dataclass(frozen=True)
class BallEigenResult:
    """Solution of the ball problem.

    ``u_boundary`` and ``norm_sq`` refer to the eigenfunction normalised by
    ``u(0) = 1``; ``norm_sq`` is its squared L² norm over the ball, so the
    L²-normalised boundary value is ``u_boundary / sqrt(norm_sq)``.
    """

    problem: BallProblem
    lam: float
    k: float
    u_boundary: float
    residual: float
    norm_sq: float
    sign_changes: int = 1
    iterations: int = 0

    @property
    def u_boundary_l2(self):
        return self.u_boundary / math.sqrt(self.norm_sq)

    def _scale(self):
        nu = self.problem.nu
        return math.gamma(nu + 1.0) * (2.0 / self.k) ** nu

    def profile(self, rho):
        """Radial eigenfunction with ``u(0) = 1``, evaluated at ``rho``."""
        nu = self.problem.nu
        rho = np.asarray(rho, dtype=float)
        out = np.empty_like(rho)
        c = self._scale()
        for idx, p in np.ndenumerate(rho):
            if p == 0.0:
                out[idx] = 1.0
            else:
                out[idx] = c * p ** (-nu) * bessel_i(nu, self.k * p)
        return out if out.ndim else float(out)

    def profile_derivative(self, rho):
        nu = self.problem.nu
        rho = np.asarray(rho, dtype=float)
        out = np.empty_like(rho)
        c = self._scale()
        k = self.k
        for idx, p in np.ndenumerate(rho):
            if p == 0.0:
                out[idx] = 0.0
            else:
                z = k * p
                out[idx] = c * p ** (-nu) * (k * bessel_i_prime(nu, z) - nu / p * bessel_i(nu, z))
        return out if out.ndim else float(out)

    @property
    def dirichlet_energy(self):
        """``∫_B |∇u|²`` for the ``u(0) = 1`` normalisation.

        From the eigen-equation, ``∫|∇u|² = λ∫u² + α∮u²``.
        """
        p = self.problem
        return self.lam * self.norm_sq + p.alpha * sphere_area(p.n, p.r) * self.u_boundary**2

    def to_dict(self):
        d = asdict(self)
        d["u_boundary_l2"] = self.u_boundary_l2
        return d


def _log_ratio_residual(p, k):
    # k I'_ν(kr)/I_ν(kr) - (α + ν/r); the e^{-z} scaling cancels in the ratio
    z = k * p.r
    return k * bessel_ie_prime(p.nu, z) / bessel_ie(p.nu, z) - p.slope


def ball_eigenvalue(p, *, scan_points=64):
    """Principal Robin eigenvalue of ``B_r`` in ``R^n``.

    The residual is normalised by ``I_ν(kr)``, i.e. the root of
    ``F(k)/I_ν(kr)`` is sought; unnormalised ``F`` grows like ``e^{kr}``.

    Raises
    ------
    ConvergenceError
        If the upper bracket end needs more than 60 doublings.
    """
    if not isinstance(p, BallProblem):
        p = BallProblem(*p)
    lo = 1e-12 * min(1.0, p.alpha)
    hi = p.slope + 1.0 / p.r
    doublings = 0
    while _log_ratio_residual(p, hi) <= 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 60:
            raise ConvergenceError(f"no sign change found for {p}")
    f_lo = _log_ratio_residual(p, lo)
    if f_lo >= 0.0:
        raise ConvergenceError(f"residual not negative at k={lo} for {p}")

    scan = np.linspace(lo, hi, scan_points)
    vals = np.array([_log_ratio_residual(p, s) for s in scan])
    sign_changes = int(np.count_nonzero(np.diff(np.sign(vals)) != 0))

    a, b = lo, hi
    it = 0
    while it < 200:
        it += 1
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if _log_ratio_residual(p, m) > 0.0:
            b = m
        else:
            a = m
    k = a if abs(_log_ratio_residual(p, a)) < abs(_log_ratio_residual(p, b)) else b
    residual = _log_ratio_residual(p, k)
    nu = p.nu
    z = k * p.r
    u_b = math.gamma(nu + 1.0) * (2.0 / z) ** nu * bessel_i(nu, z)
    # ∫_0^r ρ I_ν(kρ)² dρ = r²/2 [(1 + ν²/z²) I_ν² - I'_ν²]
    i0 = bessel_i(nu, z)
    i1 = bessel_i_prime(nu, z)
    radial = 0.5 * p.r**2 * ((1.0 + (nu / z) ** 2) * i0 * i0 - i1 * i1)
    norm_sq = sphere_area(p.n) * (math.gamma(nu + 1.0) * (2.0 / k) ** nu) ** 2 * radial
    return BallEigenResult(
        problem=p,
        lam=-k * k,
        k=k,
        u_boundary=u_b,
        residual=residual,
        norm_sq=norm_sq,
        sign_changes=sign_changes,
        iterations=it,
    )


def radial_shooting_oracle(p, lambda_trial, *, steps=4096, rho0=1e-4):
    """Boundary residual ``u'(r) - α u(r)`` of the radial ODE at ``λ``.

    Integrates ``u'' + (n-1)/ρ u' + λ u = 0`` by classical RK4 from ``rho0``
    with the two-term series start ``u = 1 + |λ|ρ²/(2n)``. Negative values mean
    ``lambda_trial`` lies above the principal eigenvalue.
    """
    if not isinstance(p, BallProblem):
        p = BallProblem(*p)
    if not lambda_trial < 0:
        raise ValueError(f"lambda_trial must be negative, got {lambda_trial!r}")
    return _shoot(p.n, float(lambda_trial), p.r, p.alpha, int(steps), float(rho0))


@njit(cache=True)
def _shoot(n, lam, r, alpha, steps, rho0):
    a = -lam
    u = 1.0 + a * rho0 * rho0 / (2.0 * n)
    w = a * rho0 / n
    h = (r - rho0) / steps
    c = n - 1.0
    x = rho0
    for _ in range(steps):
        k1u = w
        k1w = -c / x * w - lam * u
        xm = x + 0.5 * h
        u2 = u + 0.5 * h * k1u
        w2 = w + 0.5 * h * k1w
        k2u = w2
        k2w = -c / xm * w2 - lam * u2
        u3 = u + 0.5 * h * k2u
        w3 = w + 0.5 * h * k2w
        k3u = w3
        k3w = -c / xm * w3 - lam * u3
        u4 = u + h * k3u
        w4 = w + h * k3w
        k4u = w4
        k4w = -c / (x + h) * w4 - lam * u4
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        x += h
    return w - alpha * u


def shooting_eigenvalue(p, *, steps=4096, rtol=1e-14):
    """Principal eigenvalue by bisection on :func:`radial_shooting_oracle`."""
    if not isinstance(p, BallProblem):
        p = BallProblem(*p)
    upper = -p.alpha * p.n / p.r  # constant trial function: λ < -α n / r
    if radial_shooting_oracle(p, upper, steps=steps) >= 0.0:
        raise ConvergenceError("shooting residual not negative at the constant-trial bound")
    lower = 2.0 * upper
    doublings = 0
    while radial_shooting_oracle(p, lower, steps=steps) <= 0.0:
        upper = lower
        lower *= 2.0
        doublings += 1
        if doublings > 60:
            raise ConvergenceError(f"no shooting bracket for {p}")
    for _ in range(200):
        mid = 0.5 * (lower + upper)
        if abs(upper - lower) <= rtol * abs(mid):
            break
        if radial_shooting_oracle(p, mid, steps=steps) > 0.0:
            lower = mid
        else:
            upper = mid
    return 0.5 * (lower + upper)


@dataclass
class MonotonicityReport:
    n: int
    alpha: float
    radii: list
    lam: list
    y: list
    lam_increasing: bool
    y_increasing: bool
    dy: list = field(default_factory=list)
    dy_increasing: bool = True
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return self.lam_increasing and self.y_increasing

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def ball_monotonicity_check(n, alpha, radii):
    """Check that ``λ(B_r)`` and ``y(r) = r^{n/2} sqrt|λ(B_r)|`` increase in r.

    Failures are listed in the report; nothing is raised. The discrete slopes
    of ``y`` are recorded as well (``dy``), together with whether they
    themselves increase.
    """
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly increasing")
    lam = [ball_eigenvalue(BallProblem(n, alpha, r)).lam for r in radii]
    y = [r ** (n / 2.0) * math.sqrt(-l) for r, l in zip(radii, lam)]
    violations = []
    for i in range(len(radii) - 1):
        if not lam[i + 1] > lam[i]:
            violations.append(("lambda", radii[i], radii[i + 1]))
        if not y[i + 1] > y[i]:
            violations.append(("y", radii[i], radii[i + 1]))
    dy = [(y[i + 1] - y[i]) / (radii[i + 1] - radii[i]) for i in range(len(radii) - 1)]
    return MonotonicityReport(
        n=n,
        alpha=alpha,
        radii=radii,
        lam=lam,
        y=y,
        lam_increasing=not any(v[0] == "lambda" for v in violations),
        y_increasing=not any(v[0] == "y" for v in violations),
        dy=dy,
        dy_increasing=all(b > a for a, b in zip(dy, dy[1:])),
        violations=violations,
    )


def ball_shape_derivative_closed_form(res, flux):
    """First variation ``-(λ + α² + α(n-1)/r) u(r)² ∮ v·ν dS`` on a ball.

    ``u`` is the L²-normalised eigenfunction, as the variation formula
    requires.
    """
    p = res.problem
    return -(res.lam + p.alpha**2 + p.alpha * (p.n - 1) / p.r) * res.u_boundary_l2**2 * flux
