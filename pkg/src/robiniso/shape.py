"""Radial domain perturbations of star domains and first shape variations.

A perturbation moves the boundary ``r(θ) -> r(θ) + t ρ̂(θ)``; the induced
field is ``v = ρ̂ e_r`` with normal component
``v·ν = ρ̂ r / sqrt(r² + r'²)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import DomainSpec

__all__ = [
    "PerturbationField",
    "BoundaryGeometry",
    "boundary_geometry",
    "perturbed_spec",
    "volume_flux",
    "tangential_gradient_sq",
    "eigen_shape_derivative",
    "steklov_first_variation",
    "finite_difference_derivative",
    "VAR1_VARIANTS",
    "eigen_derivative_check",
    "steklov_variation_check",
]


@dataclass(frozen=True)
class PerturbationField:
    """Radial amplitude ``ρ̂(θ) = c0 + Σ p_k cos kθ + Σ q_k sin kθ``."""

    c0: float = 0.0
    cos: tuple = ()
    sin: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(c) for c in self.sin))

    @classmethod
    def mode(cls, k, amplitude=1.0, kind="cos"):
        if k == 0:
            return cls(c0=amplitude)
        coeffs = [0.0] * k
        coeffs[k - 1] = amplitude
        return cls(cos=coeffs) if kind == "cos" else cls(sin=coeffs)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, self.c0)
        for k, c in enumerate(self.cos, 1):
            out = out + c * np.cos(k * theta)
        for k, s in enumerate(self.sin, 1):
            out = out + s * np.sin(k * theta)
        return out

    def __add__(self, other):
        n = max(len(self.cos), len(other.cos))
        m = max(len(self.sin), len(other.sin))
        pad = lambda a, k: np.pad(np.asarray(a, dtype=float), (0, k - len(a)))
        return PerturbationField(
            self.c0 + other.c0, tuple(pad(self.cos, n) + pad(other.cos, n)), tuple(pad(self.sin, m) + pad(other.sin, m))
        )

    def t_max(self, spec, grid=4096):
        """Largest ``|t|`` keeping the perturbed radius above half its minimum."""
        th = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
        amp = np.max(np.abs(self(th)))
        if amp == 0.0:
            return math.inf
        return 0.5 * float(np.min(spec.radius(th))) / amp

    def to_dict(self):
        return dict(c0=self.c0, cos=list(self.cos), sin=list(self.sin))


def perturbed_spec(spec, pert, t):
    """Star spec with boundary ``r(θ) + t ρ̂(θ)``.

    Raises
    ------
    ValueError
        If ``|t|`` exceeds the validity range of the perturbation.
    """
    if spec.kind != "star":
        raise ValueError("perturbations are defined for star domains")
    if abs(t) > pert.t_max(spec):
        raise ValueError(f"|t|={abs(t)} exceeds t_max={pert.t_max(spec)}")
    if t == 0:
        return spec
    R = spec.R + t * pert.c0
    n = max(len(spec.cos), len(pert.cos))
    m = max(len(spec.sin), len(pert.sin))
    a = np.pad(np.asarray(spec.cos, dtype=float), (0, n - len(spec.cos))) * spec.R
    a = a + t * np.pad(np.asarray(pert.cos, dtype=float), (0, n - len(pert.cos)))
    b = np.pad(np.asarray(spec.sin, dtype=float), (0, m - len(spec.sin))) * spec.R
    b = b + t * np.pad(np.asarray(pert.sin, dtype=float), (0, m - len(pert.sin)))
    return DomainSpec.star(R, tuple(a / R), tuple(b / R))


@dataclass(frozen=True, eq=False)
class BoundaryGeometry:
    """Analytic boundary data at the boundary nodes of a star-domain mesh.

    Nodes are in loop order and equally spaced in arc length, so each
    carries the weight ``|∂Ω| / N`` and boundary sums are periodic
    trapezoid rules.
    """

    nodes: np.ndarray
    theta: np.ndarray
    normal: np.ndarray
    curvature: np.ndarray
    weight: np.ndarray
    er_dot_nu: np.ndarray
    spacing: float

    @property
    def perimeter(self):
        return float(np.sum(self.weight))


def boundary_geometry(mesh):
    spec = mesh.spec
    if spec is None or spec.kind != "star" or mesh.boundary_theta is None:
        raise ValueError("boundary geometry needs a mesh built from a star domain")
    nodes = mesh.boundary_nodes
    theta = np.asarray(mesh.boundary_theta)[nodes]
    P = spec.perimeter()
    N = len(nodes)
    return BoundaryGeometry(
        nodes=nodes,
        theta=theta,
        normal=spec.normal(theta),
        curvature=spec.curvature(theta),
        weight=np.full(N, P / N),
        er_dot_nu=spec.radius(theta) / spec.speed(theta),
        spacing=P / N,
    )


def volume_flux(geom, pert):
    """``∮ v·ν dS`` for the radial field of ``pert``."""
    return float(np.sum(geom.weight * pert(geom.theta) * geom.er_dot_nu))


def normal_velocity(geom, pert):
    return pert(geom.theta) * geom.er_dot_nu


def tangential_gradient_sq(geom, values):
    """``|∇^τ u|²`` at boundary nodes by centred differences in arc length."""
    u = values[geom.nodes]
    du = (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * geom.spacing)
    return du * du


def eigen_shape_derivative(mesh, geom, alpha, eig, pert):
    """First variation of the Robin eigenvalue under ``pert``.

    Integrand ``|∇u|² - λu² - 2α²u² - ακu²`` with
    ``|∇u|² = |∇^τ u|² + (αu)²`` from the boundary condition, integrated
    against ``v·ν``.
    """
    u = eig.field.values
    ub = u[geom.nodes]
    grad_sq = tangential_gradient_sq(geom, u) + (alpha * ub) ** 2
    integrand = grad_sq - eig.lam * ub**2 - 2.0 * alpha**2 * ub**2 - alpha * geom.curvature * ub**2
    return float(np.sum(geom.weight * integrand * normal_velocity(geom, pert)))


VAR1_VARIANTS = ("printed", "dimensional", "derived")


def steklov_first_variation(mesh, geom, u, G, mu, rho, pert, n=2):
    """First variation of the minimal energy, three readings of the last term.

    The integrand is ``|∇u|² - 2G(u) - 2μ²ρ² - 2μ u ∂_νρ + T`` with

    * ``printed``:      ``T = +2(n-1) μ H``
    * ``dimensional``:  ``T = +2(n-1) μ H u ρ``
    * ``derived``:      ``T = -2(n-1) μ H u ρ`` (boundary-integral rule
      ``d/dt ∮ f dS = ∮ (∂_ν f + (n-1)H f) v·ν dS`` applied to ``f = uρ``)

    ``G`` is a callable ``G(s)``; ``rho`` a :class:`~robiniso.steklov.BoundaryWeight`.
    Returns a dict ``variant -> value``.
    """
    vals = u.values if hasattr(u, "values") else np.asarray(u)
    pts = mesh.points[geom.nodes]
    ub = vals[geom.nodes]
    rb = rho.value(pts)
    dn_rho = np.sum(rho.gradient(pts) * geom.normal, axis=1)
    grad_sq = tangential_gradient_sq(geom, vals) + (mu * rb) ** 2
    H = geom.curvature / (n - 1)
    base = grad_sq - 2.0 * G(ub) - 2.0 * mu**2 * rb**2 - 2.0 * mu * ub * dn_rho
    last = {
        "printed": 2.0 * (n - 1) * mu * H,
        "dimensional": 2.0 * (n - 1) * mu * H * ub * rb,
        "derived": -2.0 * (n - 1) * mu * H * ub * rb,
    }
    vn = normal_velocity(geom, pert)
    return {k: float(np.sum(geom.weight * (base + t) * vn)) for k, t in last.items()}


def finite_difference_derivative(functional, spec, pert, steps=(1e-2, 5e-3)):
    """Centred differences of ``functional(perturbed_spec(spec, pert, t))``.

    Returns the estimate for each step, the Richardson extrapolation
    ``(4 D(t/2) - D(t)) / 3`` of the last two, and the one-sided forward
    differences, which carry a first-order remainder.
    """
    f0 = functional(spec)
    table = []
    for t in steps:
        fp = functional(perturbed_spec(spec, pert, t))
        fm = functional(perturbed_spec(spec, pert, -t))
        table.append(dict(t=t, f_plus=fp, f_minus=fm, central=(fp - fm) / (2 * t), forward=(fp - f0) / t))
    rich = None
    if len(table) >= 2:
        a, b = table[-2], table[-1]
        ratio = a["t"] / b["t"]
        rich = (ratio**2 * b["central"] - a["central"]) / (ratio**2 - 1)
    return dict(f0=f0, table=table, richardson=rich)


def eigen_derivative_check(spec, alpha, pert, h, *, steps=(1e-2, 5e-3), rel_tol=1e-2):
    """Boundary-integral eigenvalue derivative against remeshed differences.

    Returns
    -------
    ExperimentReport
        Quantities include the formula value, the FD table, the Richardson
        estimate and the forward-difference mismatches per step.
    """
    from .fem import robin_principal_eigen
    from .mesh import triangulate
    from .reports import ExperimentReport

    rep = ExperimentReport("shape-derivative", inputs=dict(spec=spec.to_dict(), alpha=alpha, h=h,
                                                           perturbation=pert.to_dict(), steps=list(steps)))
    mesh = triangulate(spec, h)
    geom = boundary_geometry(mesh)
    eig = robin_principal_eigen(mesh, alpha)
    d = eigen_shape_derivative(mesh, geom, alpha, eig, pert)
    fd = finite_difference_derivative(lambda s: robin_principal_eigen(triangulate(s, h), alpha).lam, spec, pert, steps)
    rich = fd["richardson"]
    err = abs(d - rich) / abs(rich)
    rep.quantities.update(
        derivative=d,
        richardson=rich,
        relative_error=err,
        flux=volume_flux(geom, pert),
        lam=eig.lam,
        fd_table=fd["table"],
        forward_mismatch=[abs(d - row["forward"]) for row in fd["table"]],
    )
    rep.check("|formula - FD| / |FD|", err, rel_tol)
    return rep.finish()


def steklov_variation_check(spec, G, mu, rho, pert, h, *, steps=(1e-2, 5e-3), rel_tol=2e-2):
    """Evaluate every reading of the energy variation against remeshed
    differences of the minimal energy and name the one that matches.

    The report passes when exactly one variant lies within ``rel_tol`` of
    the Richardson estimate. When the FD estimate is itself negligible
    (``|FD| < rel_tol · scale``) every variant is compared in absolute terms
    against that scale instead.
    """
    from .mesh import triangulate
    from .reports import ExperimentReport
    from .steklov import EnergyProblem, minimize_energy

    rep = ExperimentReport("steklov-variation", inputs=dict(spec=spec.to_dict(), G=G.to_dict(), mu=mu,
                                                            rho=rho.to_dict(), h=h, perturbation=pert.to_dict()))
    mesh = triangulate(spec, h)
    geom = boundary_geometry(mesh)
    u, e0, _ = minimize_energy(EnergyProblem(mesh, G, mu, rho))
    values = steklov_first_variation(mesh, geom, u, G.G, mu, rho, pert)
    fd = finite_difference_derivative(
        lambda s: minimize_energy(EnergyProblem(triangulate(s, h), G, mu, rho))[1], spec, pert, steps
    )
    rich = fd["richardson"]
    # size of the integrand, so that a vanishing derivative can be judged
    scale = float(np.sum(geom.weight * np.abs(pert(geom.theta)))) * max(1.0, abs(e0) / mesh.area)
    denom = abs(rich) if abs(rich) > rel_tol * scale else scale
    errs = {k: abs(v - rich) / denom for k, v in values.items()}
    matching = [k for k, e in errs.items() if e < rel_tol]
    rep.quantities.update(
        variants=values,
        richardson=rich,
        relative_errors=errs,
        matching=matching,
        matching_variant=matching[0] if len(matching) == 1 else None,
        scale=scale,
        fd_table=fd["table"],
        energy=e0,
    )
    for k in VAR1_VARIANTS:
        rep.check(f"{k} vs FD", errs[k], rel_tol, recorded_only=True)
    if denom == abs(rich):
        rep.check("exactly one variant matches", abs(len(matching) - 1), 0.0)
    else:
        rep.check("all variants vanish", max(errs.values()), rel_tol)
    return rep.finish()
