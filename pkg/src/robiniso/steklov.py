"""Energies of Neumann problems ``Δu + G'(u) = 0``, ``∂_ν u = μρ`` and their
isoperimetric comparison with a disk of the harmonic radius.

The energy is ``E(v) = ∫|∇v|² - 2∫G(v) - 2μ∮vρ dS``.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from scipy.interpolate import CubicHermiteSpline

from .fem import ScalarField, SolverError, _matrices, field_integrals, quadrature_operator
from .special import bessel_i, bessel_i_prime
from .transplant import ball_integral, transplant

__all__ = [
    "BoundaryWeight",
    "Nonlinearity",
    "affine",
    "quadratic_sink",
    "concave_smooth",
    "EnergyProblem",
    "ComparisonProblem",
    "RadialProfile",
    "UnsupportedCase",
    "energy",
    "weak_residual",
    "minimize_energy",
    "solvability_check",
    "comparison_radial_solution",
    "shoot_radial",
    "verify_energy_bound",
]


class UnsupportedCase(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryWeight:
    """Weight ``ρ`` defined on the whole plane, with its gradient.

    ``ρ(x) = c + g·x + q (x₁² - x₂²)``; enough to produce non-radial data
    with a nonzero normal derivative.
    """

    c: float = 1.0
    g: tuple = (0.0, 0.0)
    q: float = 0.0

    def value(self, pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        return self.c + self.g[0] * x + self.g[1] * y + self.q * (x * x - y * y)

    def gradient(self, pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        return np.stack([self.g[0] + 2 * self.q * x, self.g[1] - 2 * self.q * y], axis=1)

    @property
    def is_radial(self):
        return self.g == (0.0, 0.0) and self.q == 0.0

    def to_dict(self):
        return dict(c=self.c, g=list(self.g), q=self.q)


@dataclass(frozen=True)
class Nonlinearity:
    """``G`` with derivatives; ``kind`` in {affine, quadratic_sink, concave_smooth}."""

    kind: str
    k: float = 0.0
    c: float = 0.0
    kappa: float = 0.0
    kappa0: float = 0.0

    def __post_init__(self):
        if self.kind == "quadratic_sink" and not self.c > 0:
            raise ValueError("quadratic_sink needs c > 0")
        if self.kind == "concave_smooth" and not (self.kappa > 0 and self.kappa0 >= 0):
            raise ValueError("concave_smooth needs kappa > 0 and kappa0 >= 0")
        if self.kind not in ("affine", "quadratic_sink", "concave_smooth"):
            raise ValueError(f"unknown nonlinearity {self.kind!r}")

    def G(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "affine":
            return self.k * s
        if self.kind == "quadratic_sink":
            return -0.5 * self.c**2 * s * s
        return self.kappa * (1.0 - np.exp(-s)) + self.kappa0

    def dG(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "affine":
            return np.full_like(s, self.k)
        if self.kind == "quadratic_sink":
            return -self.c**2 * s
        return self.kappa * np.exp(-s)

    def d2G(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "affine":
            return np.zeros_like(s)
        if self.kind == "quadratic_sink":
            return np.full_like(s, -self.c**2)
        return -self.kappa * np.exp(-s)

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items()}


def affine(k):
    return Nonlinearity("affine", k=k)


def quadratic_sink(c):
    """``G(s) = -c² s²/2``, i.e. ``G = -H`` with ``h(s) = c² s``."""
    return Nonlinearity("quadratic_sink", c=c)


def concave_smooth(kappa, kappa0=0.0):
    """``G(s) = κ(1 - e^{-s}) + κ₀``: increasing and concave."""
    return Nonlinearity("concave_smooth", kappa=kappa, kappa0=kappa0)


@dataclass(frozen=True, eq=False)
class EnergyProblem:
    mesh: object
    G: Nonlinearity
    mu: float
    rho: BoundaryWeight

    def rho_nodal(self):
        return self.rho.value(self.mesh.points)

    def boundary_mass(self):
        """``∮_∂Ω ρ dS`` (exact for the P1 interpolant of ρ)."""
        _, _, B = _matrices(self.mesh)
        return float(np.ones(self.mesh.n_nodes) @ (B @ self.rho_nodal()))


def energy(p, values):
    """Discrete ``E(v)``: exact stiffness, 3-point volume rule, exact boundary
    pairing of P1 ``v`` with P1-interpolated ``ρ``."""
    f = ScalarField(p.mesh, values)
    vol, _, dirichlet = field_integrals(f, p.G.G)
    _, _, B = _matrices(p.mesh)
    return dirichlet - 2.0 * vol - 2.0 * p.mu * float(f.values @ (B @ p.rho_nodal()))


def weak_residual(p, values):
    """Nodal residual ``Ku - ∫G'(u)φ_i - μ∮ρφ_i``."""
    K, _, B = _matrices(p.mesh)
    P, w = quadrature_operator(p.mesh)
    return K @ values - P.T @ (w * p.G.dG(P @ values)) - p.mu * (B @ p.rho_nodal())


def minimize_energy(p, *, tol=1e-10, max_steps=50):
    """Minimiser of the discrete energy and its value.

    ``quadratic_sink``: one solve of ``(K + c²M) u = μ B ρ``.
    ``concave_smooth``: damped Newton with backtracking, energy decreasing
    at every step; a minimiser exists only if ``μ∮ρ < 0`` because
    integrating the equation gives ``∫G'(u) = -μ∮ρ`` with ``G' > 0``.

    Returns ``(field, energy, info)``.
    """
    K, M, B = _matrices(p.mesh)
    if p.G.kind == "affine":
        raise UnsupportedCase("affine G has no minimiser in general; use solvability_check")
    if p.G.kind == "quadratic_sink":
        u = sla.spsolve((K + p.G.c**2 * M).tocsc(), p.mu * (B @ p.rho_nodal()))
        res = float(np.linalg.norm(weak_residual(p, u)))
        return ScalarField(p.mesh, u), energy(p, u), dict(steps=1, residual=res, energies=[])

    flux = p.mu * p.boundary_mass()
    if flux >= 0:
        raise UnsupportedCase(f"μ∮ρ = {flux:.3e} >= 0: energy is unbounded below, no minimiser")
    P, w = quadrature_operator(p.mesh)
    # constant start solving ∫G'(s) = -μ∮ρ
    s0 = -math.log(-flux / (p.G.kappa * p.mesh.area))
    u = np.full(p.mesh.n_nodes, s0)
    e = energy(p, u)
    energies = [e]
    for step in range(1, max_steps + 1):
        r = weak_residual(p, u)
        if np.linalg.norm(r) < tol:
            return ScalarField(p.mesh, u), e, dict(steps=step - 1, residual=float(np.linalg.norm(r)), energies=energies)
        J = (K - P.T @ sp.diags(w * p.G.d2G(P @ u)) @ P).tocsc()
        du = -sla.spsolve(J, r)
        slope = 2.0 * float(r @ du)
        a = 1.0
        while True:
            trial = u + a * du
            et = energy(p, trial)
            if et <= e + 1e-4 * a * slope or a < 1e-10:
                break
            a *= 0.5
        if et > e:
            # energy at machine precision; accept only non-increasing steps
            if np.linalg.norm(weak_residual(p, trial)) < np.linalg.norm(r):
                u = trial
            break
        u, e = trial, et
        energies.append(e)
    r = weak_residual(p, u)
    if np.linalg.norm(r) < tol:
        return ScalarField(p.mesh, u), energy(p, u), dict(steps=step, residual=float(np.linalg.norm(r)), energies=energies)
    raise SolverError(f"Newton did not converge in {max_steps} steps; residual {np.linalg.norm(r):.3e}")


def solvability_check(k, mu, rho, mesh, *, samples=(-100.0, -10.0, 10.0, 100.0), tol=1e-8):
    """Diagnostics for the affine case ``G(s) = ks``.

    Integrating ``Δu + k = 0`` against 1 gives the compatibility condition
    ``k|Ω| + μ∮ρ dS = 0``. The report gives that defect, the defect of the
    relation ``k = μ∮ρ dS``, the energy along constant fields (linear in
    ``s`` with slope ``-2(k|Ω| + μ∮ρ)``) and the change of energy under
    adding a constant.
    """
    p = EnergyProblem(mesh, affine(k), mu, rho)
    M_b = p.boundary_mass()
    area = mesh.area
    defect = k * area + mu * M_b
    e_const = {float(s): energy(p, np.full(mesh.n_nodes, s)) for s in samples}
    # shift test on a non-constant field
    x = mesh.points[:, 0]
    shift = energy(p, x + 10.0) - energy(p, x)
    return dict(
        k=k,
        mu=mu,
        boundary_integral=M_b,
        area=area,
        compatibility_defect=defect,
        compatible=bool(abs(defect) <= tol * max(1.0, abs(k) * area, abs(mu * M_b))),
        relation_k_equals_muM_defect=k - mu * M_b,
        constant_field_energies=e_const,
        unbounded_below=bool(min(e_const.values()) < -abs(defect) * 0.5 * max(abs(s) for s in samples))
        and abs(defect) > tol,
        energy_shift_by_constant=shift,
    )


@dataclass(frozen=True)
class ComparisonProblem:
    """Data of the radial comparison problem on ``B_{r_Ω}``.

    ``M`` is ``∮_∂Ω ρ dS``. ``convention`` fixes the boundary slope
    ``φ'(r_Ω)``: ``"literal"`` uses ``μM``; ``"energy"`` uses
    ``μM / |∂B_{r_Ω}|``, the slope of the minimiser of the comparison
    energy (whose boundary term is ``-2 φ(r_Ω) μM``).
    """

    r_Omega: float
    M: float
    gamma_n: float = 1.0
    convention: str = "energy"

    def slope(self, mu):
        if self.convention == "literal":
            return mu * self.M
        if self.convention == "energy":
            return mu * self.M / (2.0 * math.pi * self.r_Omega)
        raise ValueError(f"unknown convention {self.convention!r}")

    @property
    def M_ball(self):
        return self.M


@dataclass
class RadialProfile:
    r: float
    phi: object
    dphi: object
    energy: float
    phi0: float
    slope: float
    method: str

    def __call__(self, rho):
        return self.phi(rho)


def shoot_radial(dG, phi0, r, *, steps=4096, rho0=1e-4, dense=False):
    """RK4 for ``φ'' + φ'/ρ + G'(φ) = 0`` (n = 2) from ``φ(0) = phi0``.

    Returns ``φ'(r)``, or the arrays ``(ρ, φ, φ')`` when ``dense``.
    """
    g0 = float(dG(phi0))
    u = phi0 - g0 * rho0 * rho0 / 4.0
    w = -g0 * rho0 / 2.0
    h = (r - rho0) / steps
    x = rho0

    def f(x, u, w):
        return w, -w / x - float(dG(u))

    if dense:
        xs, us, ws = [x], [u], [w]
    for _ in range(steps):
        k1 = f(x, u, w)
        k2 = f(x + h / 2, u + h / 2 * k1[0], w + h / 2 * k1[1])
        k3 = f(x + h / 2, u + h / 2 * k2[0], w + h / 2 * k2[1])
        k4 = f(x + h, u + h * k3[0], w + h * k3[1])
        u += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        w += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        x += h
        if dense:
            xs.append(x)
            us.append(u)
            ws.append(w)
    if dense:
        return np.array(xs), np.array(us), np.array(ws)
    return w


def _shoot_to_slope(dG, r, slope, *, steps=4096, start=0.0, width=1.0):
    f = lambda a: shoot_radial(dG, a, r, steps=steps) - slope
    lo, hi = start - width, start + width
    flo, fhi = f(lo), f(hi)
    for _ in range(80):
        if flo * fhi <= 0:
            break
        width *= 2.0
        lo, hi = start - width, start + width
        flo, fhi = f(lo), f(hi)
    else:
        raise SolverError(f"shooting bracket not found (last values {flo:.3e}, {fhi:.3e})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * max(1.0, abs(mid)):
            break
        fm = f(mid)
        if (fm <= 0) == (flo <= 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def comparison_radial_solution(cp, mu, case, G, *, method=None, steps=4096):
    """Radial comparison profile on ``B_{r_Ω}`` and its comparison energy.

    Case ``"ii"`` (``G = -H``, ``h(s) = c²s``): ``Δφ = γⁿc²φ``, closed form
    ``φ = A I_0(βρ)``, ``β = γ^{n/2} c``, ``A = φ'(r_Ω)/(β I_1(βr_Ω))``;
    energy ``∫|∇φ|² + 2γⁿ∫H(φ) - 2φ(r_Ω)μM``.

    Case ``"i"``: ``Δφ + G'(φ) = 0`` by shooting on ``φ(0)``; energy
    ``∫|∇φ|² - 2∫G(φ) - 2φ(r_Ω)μM``.

    ``method="shooting"`` forces the shooting path in case ``"ii"``.
    """
    r = cp.r_Omega
    slope = cp.slope(mu)
    if case == "ii":
        if G.kind != "quadratic_sink":
            raise UnsupportedCase("case ii is implemented for h(s) = c²s")
        beta = math.sqrt(cp.gamma_n) * G.c
        Hfun = lambda s: 0.5 * G.c**2 * np.asarray(s) ** 2
        if method == "shooting":
            dG = lambda s: -(beta**2) * s
            phi0 = _shoot_to_slope(dG, r, slope, steps=steps, start=0.0, width=max(1.0, abs(slope)))
            xs, us, ws = shoot_radial(dG, phi0, r, steps=steps, dense=True)
            phi, dphi = _dense_profile(xs, us, ws, dG, phi0)
        else:
            A = slope / (beta * bessel_i(1, beta * r))
            phi0 = A
            phi = np.vectorize(lambda p: A * bessel_i(0, beta * p), otypes=[float])
            dphi = np.vectorize(lambda p: A * beta * bessel_i(1, beta * p), otypes=[float])
        grad = ball_integral(lambda s: dphi(s) ** 2, r)
        e = grad + 2.0 * cp.gamma_n * ball_integral(lambda s: Hfun(phi(s)), r) - 2.0 * float(phi(r)) * mu * cp.M
        return RadialProfile(r, phi, dphi, e, float(phi0), slope, method or "closed_form")
    if case == "i":
        if G.kind != "concave_smooth":
            raise UnsupportedCase("case i is implemented for concave_smooth G")
        # constant start: G'(s)·π r² ≈ -2π r φ'(r)
        guess = -math.log(max(-2.0 * slope / (G.kappa * r), 1e-300)) if slope < 0 else 0.0
        phi0 = _shoot_to_slope(G.dG, r, slope, steps=steps, start=guess, width=1.0)
        xs, us, ws = shoot_radial(G.dG, phi0, r, steps=steps, dense=True)
        phi, dphi = _dense_profile(xs, us, ws, G.dG, phi0)
        grad = ball_integral(lambda s: dphi(s) ** 2, r)
        e = grad - 2.0 * ball_integral(lambda s: G.G(phi(s)), r) - 2.0 * float(phi(r)) * mu * cp.M
        return RadialProfile(r, phi, dphi, e, float(phi0), slope, "shooting")
    raise ValueError(f"case must be 'i' or 'ii', got {case!r}")


def _dense_profile(xs, us, ws, dG, phi0):
    xs = np.concatenate([[0.0], xs])
    us = np.concatenate([[phi0], us])
    ws = np.concatenate([[0.0], ws])
    spline = CubicHermiteSpline(xs, us, ws)
    dspline = spline.derivative()
    return (lambda p: spline(np.asarray(p, dtype=float))), (lambda p: dspline(np.asarray(p, dtype=float)))


def verify_energy_bound(p, cp, green, case="ii", *, allowance=None):
    """Check ``E(Ω) <= E(U) <= comparison energy`` for the transplanted ``U``.

    ``E(Ω)`` is the discrete minimum, ``U`` the transplant of the comparison
    profile into ``Ω`` and the comparison energy is that of the radial
    problem on ``B_{r_Ω}``. The second inequality is also recorded for the
    other slope convention. The allowance defaults to
    ``0.1 (h / r_Ω) |comparison energy|``.
    """
    from .reports import ExperimentReport
    from .transplant import PreconditionError

    mesh = p.mesh
    rep = ExperimentReport(
        "steklov-energy-bound",
        inputs=dict(mu=p.mu, G=p.G.to_dict(), rho=p.rho.to_dict(), h=mesh.h, case=case,
                    spec=mesh.spec.to_dict() if mesh.spec else None, convention=cp.convention),
    )
    u, e_min, info = minimize_energy(p)
    prof = comparison_radial_solution(cp, p.mu, case, p.G)
    r = cp.r_Omega
    if case == "ii":
        grid = np.linspace(0.0, r, 257)
        pv = np.asarray(prof.phi(grid))
        if p.mu * cp.M > 0 and (np.any(pv <= 0) or np.any(np.diff(pv) < 0)):
            raise PreconditionError("comparison profile is not positive and increasing")
    U = transplant(prof.phi, green)
    e_U = energy(p, U.values)
    tol = allowance if allowance is not None else 0.1 * mesh.h / r * abs(prof.energy)
    perim_ball = 2.0 * math.pi * r
    mean_rho = cp.M / mesh.perimeter
    rep.quantities.update(
        E_min=e_min,
        E_transplant=e_U,
        E_comparison=prof.energy,
        newton_steps=info["steps"],
        residual=info["residual"],
        M_domain=cp.M,
        M_ball=perim_ball * mean_rho,
        r_Omega=r,
        gamma_n=cp.gamma_n,
        phi0=prof.phi0,
        phi_boundary=float(prof.phi(r)),
        slope=prof.slope,
        allowance=tol,
    )
    # term-by-term split of both energies, to locate a failing link
    vol_U, _, grad_U = field_integrals(U, p.G.G)
    grad_B = ball_integral(lambda s: prof.dphi(s) ** 2, r)
    rep.quantities.update(
        grad_transplant=grad_U,
        grad_ball=grad_B,
        G_transplant=vol_U,
        G_ball=ball_integral(lambda s: p.G.G(prof.phi(s)), r),
    )
    rep.check("E_min <= E_transplant", e_min, e_U, 1e-10 * max(1.0, abs(e_min)))
    rep.check("E_transplant <= E_comparison", e_U, prof.energy, tol)
    rep.check("E_min <= E_comparison", e_min, prof.energy, tol, recorded_only=True)
    other = ComparisonProblem(cp.r_Omega, cp.M, cp.gamma_n, "literal" if cp.convention == "energy" else "energy")
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            alt = comparison_radial_solution(other, p.mu, case, p.G)
        e_alt = energy(p, transplant(alt.phi, green).values)
        rep.quantities.update(alt_convention=other.convention, E_transplant_alt=e_alt, E_comparison_alt=alt.energy)
        rep.check(f"E_transplant <= E_comparison ({other.convention})", e_alt, alt.energy,
                  0.1 * mesh.h / r * abs(alt.energy), recorded_only=True)
    except (SolverError, ValueError) as exc:
        rep.quantities.update(alt_convention=other.convention, alt_error=str(exc))
    return rep.finish()
