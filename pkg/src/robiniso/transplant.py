"""Dirichlet Green's function, harmonic radius, level-set measures and
harmonic transplantation on planar meshes (n = 2).

With ``G(x, y) = (S(|x-y|) - H(x, y)) / (2π)``, ``S(t) = -ln t``, the harmonic
radius is ``r(y) = exp(-H(y, y))``; its maximiser is the harmonic centre
``y_h`` and the maximum is ``r_Ω``. A radial profile ``φ`` on ``B_{r_Ω}`` is
transplanted to ``U(x) = φ(r_Ω exp(-2π G(x, y_h)))``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .fem import ScalarField, _matrices, dirichlet_solve, field_integrals, harmonic_extension_operator
from .mesh import locate

__all__ = [
    "GREEN_GAMMA",
    "GreenData",
    "LevelSetTable",
    "PreconditionError",
    "RangeError",
    "green_function",
    "harmonic_radius",
    "harmonic_center",
    "boundary_distance",
    "superlevel_fractions",
    "level_set_measures",
    "verify_capacity_equality",
    "transplant",
    "verify_transplant_bounds",
    "ball_integral",
    "mesh_allowance",
    "area_allowance",
    "verify_lemma_cap2",
    "rayleigh_quotient",
    "theorem1_check",
]

GREEN_GAMMA = 1.0 / (2.0 * math.pi)


class PreconditionError(ValueError):
    pass


class RangeError(ValueError):
    pass


def boundary_distance(mesh, pts):
    """Distance from each point to the boundary polyline."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a = mesh.points[mesh.boundary_edges[:, 0]]
    d = mesh.edge_vectors
    L2 = mesh.edge_lengths**2
    out = np.empty(len(pts))
    for s in range(0, len(pts), 2048):
        p = pts[s : s + 2048, None, :]
        t = np.clip(np.sum((p - a) * d, axis=-1) / L2, 0.0, 1.0)
        q = a + t[..., None] * d
        out[s : s + 2048] = np.min(np.hypot(*(p - q).transpose(2, 0, 1)), axis=1)
    return out


@dataclass(frozen=True, eq=False)
class GreenData:
    pole: np.ndarray
    H_field: ScalarField
    G_field: ScalarField
    harmonic_radius_at_pole: float
    green_gamma: float = GREEN_GAMMA

    @property
    def mesh(self):
        return self.H_field.mesh

    def transplant_radius(self):
        """Nodal ``r_Ω exp(-2π G) = r_Ω |x-y| exp(H)``, finite at the pole."""
        d = np.hypot(*(self.mesh.points - self.pole).T)
        return self.harmonic_radius_at_pole * d * np.exp(self.H_field.values)


def green_function(mesh, y):
    """Green's function of the mesh domain with pole ``y``.

    ``H`` is the discrete harmonic extension of ``-ln|x-y|`` from the
    boundary. Should a node sit on the pole, its ``S`` value is taken from the
    next-nearest distance so that ``G`` stays finite.

    Raises
    ------
    PreconditionError
        If ``y`` is within ``2h`` of the boundary.
    """
    y = np.asarray(y, dtype=float)
    if boundary_distance(mesh, y)[0] <= 2.0 * mesh.h:
        raise PreconditionError(f"pole {y} is within 2h of the boundary")
    d = np.hypot(*(mesh.points - y).T)
    H = dirichlet_solve(mesh, -np.log(np.where(d > 0, d, 1.0)))
    near = d < 1e-9 * mesh.h
    if np.any(near):
        d = d.copy()
        d[near] = np.min(d[~near])
    S = -np.log(d)
    G = GREEN_GAMMA * (S - H.values)
    G[mesh.is_boundary] = 0.0
    r = math.exp(-H(y))
    return GreenData(pole=y, H_field=H, G_field=ScalarField(mesh, G), harmonic_radius_at_pole=r)


def _regular_part_at(mesh, y):
    # H(y, y) = Σ_b w_b(y) S(|x_b - y|), w(y) = P1-interpolated harmonic measure
    E, fixed = harmonic_extension_operator(mesh)
    i, lam = locate(mesh, y)
    if i < 0:
        return None
    w = lam @ E[mesh.triangles[i]]
    db = np.hypot(*(mesh.points[fixed] - y).T)
    return float(w @ -np.log(db))


def harmonic_radius(mesh, y):
    """``r(y) = exp(-H(y, y))``; zero outside the mesh or on the boundary."""
    H = _regular_part_at(mesh, np.asarray(y, dtype=float))
    if H is None or not math.isfinite(H):
        return 0.0
    return math.exp(-H)


def harmonic_center(mesh, *, depth=2.0, xatol=1e-6):
    """Maximiser ``y_h`` of the harmonic radius and the maximum ``r_Ω``.

    Interior nodes deeper than ``depth * h`` seed the search; Nelder-Mead
    with a fixed initial simplex of size ``h`` refines the best seed.
    """
    E, fixed = harmonic_extension_operator(mesh)
    dist = boundary_distance(mesh, mesh.points)
    cand = np.nonzero(dist > depth * mesh.h)[0]
    if cand.size == 0:
        raise PreconditionError("mesh too coarse: no node is deeper than 2h")
    xb = mesh.points[fixed]
    Hn = np.empty(cand.size)
    for s in range(0, cand.size, 1024):
        c = cand[s : s + 1024]
        dd = np.hypot(*(mesh.points[c][:, None, :] - xb[None]).transpose(2, 0, 1))
        Hn[s : s + 1024] = np.sum(E[c] * -np.log(dd), axis=1)
    best = cand[int(np.argmin(Hn))]
    x0 = mesh.points[best]

    def objective(y):
        H = _regular_part_at(mesh, y)
        return 1e6 if H is None else H

    simplex = np.array([x0, x0 + [mesh.h, 0.0], x0 + [0.0, mesh.h]])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options=dict(xatol=xatol, fatol=1e-15, initial_simplex=simplex, maxiter=2000),
    )
    y = res.x if res.fun <= Hn.min() else x0
    return np.asarray(y), math.exp(-min(res.fun, Hn.min()))


def superlevel_fractions(values, tris, t):
    """Exact area fraction of ``{u >= t}`` in each triangle for a P1 field."""
    g = np.sort(values[tris], axis=1)
    ga, gb, gc = g[:, 0], g[:, 1], g[:, 2]
    frac = np.zeros(len(g))
    frac[t <= ga] = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        top = (t >= gb) & (t < gc)
        # products of ratios in [0, 1]; a squared numerator over a product
        # of small gaps would underflow
        f_top = ((gc - t) / (gc - ga)) * ((gc - t) / (gc - gb))
        low = (t > ga) & (t < gb)
        f_low = 1.0 - ((t - ga) / (gb - ga)) * ((t - ga) / (gc - ga))
    frac = np.where(top, f_top, frac)
    frac = np.where(low, f_low, frac)
    return frac


@dataclass
class LevelSetTable:
    t: np.ndarray
    m_Omega: np.ndarray
    m_Ball: np.ndarray
    gamma_ratio: float
    r_Omega: float
    area: float
    n: int = 2

    @property
    def bound(self):
        return self.gamma_ratio**self.n * self.m_Ball

    @property
    def margin(self):
        return self.bound - self.m_Omega

    def rows(self):
        return [
            dict(t=float(a), m_Omega=float(b), m_Ball=float(c), bound=float(d), margin=float(e))
            for a, b, c, d, e in zip(self.t, self.m_Omega, self.m_Ball, self.bound, self.margin)
        ]

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["t", "m_Omega", "m_Ball", "bound", "margin"])
            w.writeheader()
            for row in self.rows():
                w.writerow({k: repr(v) for k, v in row.items()})

    def to_dict(self):
        return dict(gamma_ratio=self.gamma_ratio, r_Omega=self.r_Omega, area=self.area, rows=self.rows())


def level_set_measures(green, t_grid):
    """Superlevel areas of ``G(·, pole)`` and of the ball Green's function.

    The ball column is ``π r_t²`` with ``r_t = r_Ω e^{-2πt}``.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be nonnegative and increasing")
    mesh = green.mesh
    G = green.G_field.values
    m = np.array([float(mesh.areas @ superlevel_fractions(G, mesh.triangles, ti)) for ti in t])
    r = green.harmonic_radius_at_pole
    mb = math.pi * (r * np.exp(-2.0 * math.pi * t)) ** 2
    gamma_ratio = math.sqrt(mesh.area / (math.pi * r * r))
    return LevelSetTable(t=t, m_Omega=m, m_Ball=mb, gamma_ratio=gamma_ratio, r_Omega=r, area=mesh.area)


def verify_capacity_equality(green, t, *, min_triangles=10):
    """Capacity of ``Ω \\ Ω^t`` from the discrete energy versus the annulus.

    Returns ``(cap_domain, cap_ball, relative_gap)``. The annulus capacity is
    ``2π / ln(r_Ω / r_t)``, which equals ``1/t``.
    """
    mesh = green.mesh
    G = green.G_field.values
    frac = superlevel_fractions(G, mesh.triangles, t)
    m = float(mesh.areas @ frac)
    if m <= min_triangles * float(np.mean(mesh.areas)):
        raise RangeError(f"level set at t={t} is under-resolved (area {m:.3e})")
    grad = green.G_field.gradients()
    energy = float(np.sum(np.sum(grad * grad, axis=1) * mesh.areas * (1.0 - frac)))
    cap_domain = energy / (t * t)
    r = green.harmonic_radius_at_pole
    r_t = r * math.exp(-2.0 * math.pi * t)
    cap_ball = 2.0 * math.pi / math.log(r / r_t)
    return cap_domain, cap_ball, abs(cap_domain - cap_ball) / cap_ball


def mesh_allowance(mesh):
    """Level-set measure allowance ``10 h |∂Ω|``."""
    return 10.0 * mesh.h * mesh.perimeter


def verify_lemma_cap2(table, allowance):
    """Check ``m_Ω(t) <= γⁿ m_B(t) + allowance`` row by row."""
    rows = []
    for row in table.rows():
        row = dict(row)
        row["allowance"] = allowance
        row["passed"] = bool(row["m_Omega"] <= row["bound"] + allowance)
        rows.append(row)
    worst = min(r["margin"] for r in rows)
    return dict(
        passed=all(r["passed"] for r in rows),
        worst_margin=worst,
        allowance=allowance,
        gamma_ratio=table.gamma_ratio,
        rows=rows,
    )


def transplant(phi, green):
    """Nodal transplant ``U(x) = φ(r_Ω exp(-2π G(x, y_h)))``.

    ``phi`` is a vectorised callable on ``[0, r_Ω]``. On boundary nodes the
    argument is exactly ``r_Ω``, so ``U`` is constant there.
    """
    rho = green.transplant_radius()
    rho[green.mesh.is_boundary] = green.harmonic_radius_at_pole
    return ScalarField(green.mesh, np.asarray(phi(rho), dtype=float))


def ball_integral(fn, r, n_points=400):
    """``∫_{B_r} fn(|x|) dx`` in the plane by Gauss-Legendre in the radius."""
    x, w = np.polynomial.legendre.leggauss(n_points)
    rho = 0.5 * r * (x + 1.0)
    return float(np.sum(0.5 * r * w * 2.0 * math.pi * rho * fn(rho)))


def verify_transplant_bounds(phi, green, f, *, allowance=None, samples=257):
    """Check ``∫_B f(φ) <= ∫_Ω f(U) <= γⁿ ∫_B f(φ)`` with an allowance.

    ``phi`` must be radial, positive and nondecreasing on ``[0, r_Ω]`` and
    ``f`` positive and nondecreasing on the range of ``phi``.
    """
    r = green.harmonic_radius_at_pole
    grid = np.linspace(0.0, r, samples)
    pv = np.asarray(phi(grid), dtype=float)
    if np.any(np.diff(pv) < -1e-12 * np.max(np.abs(pv))) or np.any(pv <= 0):
        raise PreconditionError("phi must be positive and nondecreasing")
    fv = np.asarray(f(pv), dtype=float)
    if np.any(fv <= 0) or np.any(np.diff(fv) < -1e-12 * np.max(fv)):
        raise PreconditionError("f must be positive and nondecreasing on the range of phi")
    mesh = green.mesh
    U = transplant(phi, green)
    dom = field_integrals(U, f)[0]
    ball = ball_integral(lambda s: f(np.asarray(phi(s))), r)
    gamma_n = mesh.area / (math.pi * r * r)
    if allowance is None:
        allowance = mesh.h * mesh.perimeter * float(np.max(fv)) * 0.1
    return dict(
        ball_integral=ball,
        domain_integral=dom,
        upper_bound=gamma_n * ball,
        gamma_n=gamma_n,
        allowance=allowance,
        lower_margin=dom - ball,
        upper_margin=gamma_n * ball - dom,
        lower_passed=bool(dom >= ball - allowance),
        upper_passed=bool(dom <= gamma_n * ball + allowance),
        passed=bool(ball - allowance <= dom <= gamma_n * ball + allowance),
        # layer-cake with m_Ω <= γⁿ m_B gives this direction for increasing φ
        reverse_upper_passed=bool(dom >= gamma_n * ball - allowance),
    )


def area_allowance(mesh, r_Omega):
    """Allowance ``h² |∂Ω| / (4 r_Ω)`` for area comparisons on a mesh."""
    return mesh.h**2 * mesh.perimeter / (4.0 * r_Omega)


def rayleigh_quotient(field, alpha):
    """``(∫|∇v|² - α∮v²) / ∫v²`` for a P1 field."""
    sq = lambda s: np.asarray(s) ** 2
    vol, bnd, grad = field_integrals(field, sq)
    return (grad - alpha * bnd) / vol


def theorem1_check(spec, alpha, h, *, mesh=None, tol_factor=0.1):
    """Compare ``|Ω|λ(Ω)`` with ``|B_{r_Ω}|λ(B_{r_Ω})`` on a meshed domain.

    The asserted inequality carries the allowance
    ``tol_factor (h / r_Ω) |B_{r_Ω}| |λ(B_{r_Ω})|``. Also reported:
    the disk of equal area, the constant-trial bound, the Rayleigh quotient
    of the transplanted ball eigenfunction and the perimeter chain
    ``|∂Ω| >= 2√(π|Ω|) >= 2π r_Ω``.

    Returns
    -------
    ExperimentReport
    """
    from .ball import BallProblem, ball_eigenvalue
    from .fem import robin_principal_eigen
    from .mesh import triangulate
    from .reports import ExperimentReport

    rep = ExperimentReport("theorem1", inputs=dict(spec=spec.to_dict(), alpha=alpha, h=h))
    if mesh is None:
        mesh = triangulate(spec, h)
    eig = robin_principal_eigen(mesh, alpha)
    y_h, r_Omega = harmonic_center(mesh)
    green = green_function(mesh, y_h)
    ball = ball_eigenvalue(BallProblem(2, alpha, r_Omega))
    area, perim = mesh.area, mesh.perimeter
    ball_area = math.pi * r_Omega**2
    gamma_n = area / ball_area
    R = math.sqrt(area / math.pi)
    lam_R = ball_eigenvalue(BallProblem(2, alpha, R)).lam
    U = transplant(ball.profile, green)
    rq = rayleigh_quotient(U, alpha)
    lhs, rhs = area * eig.lam, ball_area * ball.lam
    tol = tol_factor * h / r_Omega * abs(rhs)
    rep.quantities.update(
        lam_Omega=eig.lam,
        area=area,
        perimeter=perim,
        harmonic_center=y_h,
        r_Omega=r_Omega,
        lam_ball=ball.lam,
        gamma_ratio=math.sqrt(gamma_n),
        scaled_Omega=lhs,
        scaled_ball=rhs,
        relative_margin=(rhs - lhs) / abs(rhs),
        R_equal_area=R,
        lam_equal_area_ball=lam_R,
        constant_trial_bound=-alpha * perim / area,
        transplant_rayleigh=rq,
        transplant_bound=ball.lam / gamma_n,
        n_nodes=mesh.n_nodes,
        allowance=tol,
    )
    rep.check("|Ω|λ(Ω) <= |B|λ(B)", lhs, rhs, tol)
    # the mesh polygon is inscribed in Ω, losing about h²|∂Ω|/(12 r) of area
    geo = area_allowance(mesh, r_Omega)
    rep.quantities["area_allowance"] = geo
    rep.check("|B_rΩ| <= |Ω|", ball_area, area, geo)
    rep.check("λ(Ω) <= λ(B_R)", eig.lam, lam_R, tol / area, recorded_only=True)
    rep.check("λ(Ω) < -α|∂Ω|/|Ω|", eig.lam, -alpha * perim / area, 0.0, recorded_only=True)
    rep.check("λ(Ω) <= transplanted quotient", eig.lam, rq, 1e-10 * abs(rq))
    rep.check("transplanted quotient <= γ^-n λ(B)", rq, ball.lam / gamma_n, tol / area, recorded_only=True)
    rep.check("2√(π|Ω|) <= |∂Ω|", 2.0 * math.sqrt(math.pi * area), perim, 1e-12 * perim)
    rep.check("2π r_Ω <= 2√(π|Ω|)", 2.0 * math.pi * r_Omega, 2.0 * math.sqrt(math.pi * area),
              math.pi * r_Omega * geo / area)
    return rep.finish()
