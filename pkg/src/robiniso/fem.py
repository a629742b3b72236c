"""P1 finite elements: assembly, Robin principal eigenpair, elliptic solves
and field integrals."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .mesh import Mesh, locate

__all__ = [
    "ScalarField",
    "EigenResult",
    "SolverError",
    "assemble",
    "robin_principal_eigen",
    "dirichlet_solve",
    "helmholtz_neumann_solve",
    "field_integrals",
    "count_below",
    "quadrature_operator",
]

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ScalarField:
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_nodes,):
            raise ValueError(f"expected {self.mesh.n_nodes} nodal values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)

    def __call__(self, pt):
        """P1 interpolation at an arbitrary point inside the mesh."""
        i, lam = locate(self.mesh, pt)
        if i < 0:
            raise ValueError(f"point {pt} is outside the mesh")
        return float(lam @ self.values[self.mesh.triangles[i]])

    def gradients(self):
        """Constant gradient on each triangle, ``(T, 2)``."""
        g = self.mesh.gradients
        return np.einsum("tij,ti->tj", g, self.values[self.mesh.triangles])


@dataclass(frozen=True, eq=False)
class EigenResult:
    lam: float
    field: ScalarField
    rayleigh_residual: float
    iterations: int = 0
    shift: float = 0.0


def _matrices(mesh):
    cache = mesh.__dict__.get("_fem_cache")
    if cache is None:
        cache = _assemble(mesh)
        object.__setattr__(mesh, "_fem_cache", cache)
    return cache


def _assemble(mesh):
    t = mesh.triangles
    n = mesh.n_nodes
    g = mesh.gradients
    area = mesh.areas
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    ke = np.einsum("tik,tjk->tij", g, g) * area[:, None, None]
    K = sp.csr_matrix((ke.ravel(), (rows, cols)), shape=(n, n))
    local = (np.ones((3, 3)) + np.eye(3)) / 12.0
    me = area[:, None, None] * local[None]
    M = sp.csr_matrix((me.ravel(), (rows, cols)), shape=(n, n))
    e = mesh.boundary_edges
    L = mesh.edge_lengths
    be = L[:, None, None] * (np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0)[None]
    brow = np.repeat(e, 2, axis=1).ravel()
    bcol = np.tile(e, (1, 2)).ravel()
    B = sp.csr_matrix((be.ravel(), (brow, bcol)), shape=(n, n))
    return K, M, B


def assemble(mesh):
    """Stiffness ``K``, mass ``M`` and boundary mass ``B`` (sparse CSR).

    For a P1 field ``u``: ``uᵀKu = ∫|∇u|²``, ``uᵀMu = ∫u²`` and
    ``uᵀBu = ∮u² dS``, all exact (the boundary term uses the exact edge
    mass matrix ``L/6 [[2, 1], [1, 2]]``).
    """
    return _matrices(mesh)


def _symmetric_lu(A):
    return sla.splu(
        sp.csc_matrix(A),
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options=dict(SymmetricMode=True),
    )


def count_below(mesh, alpha, sigma):
    """Number of pencil eigenvalues of ``(K - αB, M)`` below ``sigma``.

    Counts negative pivots of an unpivoted symmetric LU of ``K - αB - σM``
    (Sylvester's law of inertia).
    """
    K, M, B = _matrices(mesh)
    lu = _symmetric_lu(K - alpha * B - sigma * M)
    if not np.array_equal(lu.perm_r, lu.perm_c):
        raise SolverError("factorisation pivoted off the diagonal; inertia unavailable")
    return int(np.count_nonzero(lu.U.diagonal() < 0)), lu


def robin_principal_eigen(mesh, alpha, *, tol=1e-12, maxiter=500):
    """Smallest eigenpair of ``(K - αB) u = λ M u``.

    Shift-and-invert iteration starting from the constant vector with shift
    ``σ₀ = -α |∂Ω|/|Ω| - 1``. The constant trial function only bounds ``λ``
    from above, so the shift is certified by an inertia count and lowered
    until no eigenvalue lies below it.

    The eigenfunction is normalised to ``∫u² = 1`` and made positive.

    Raises
    ------
    SolverError
        If the Rayleigh quotient has not settled after ``maxiter`` steps.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    K, M, B = _matrices(mesh)
    A = (K - alpha * B).tocsr()
    sigma = -alpha * mesh.perimeter / mesh.area - 1.0
    for _ in range(60):
        below, lu = count_below(mesh, alpha, sigma)
        if below == 0:
            break
        log.debug("shift %g lies above %d eigenvalue(s); lowering", sigma, below)
        sigma = sigma - 2.0 * (abs(sigma) + 1.0)
    else:
        raise SolverError("could not place the shift below the spectrum")

    x = np.ones(mesh.n_nodes)
    x /= np.sqrt(x @ (M @ x))
    rq = x @ (A @ x)
    it = 0
    converged = False
    while it < maxiter:
        for _ in range(10):
            it += 1
            y = lu.solve(M @ x)
            y /= np.sqrt(y @ (M @ y))
            new = y @ (A @ y)
            x = y
            done = abs(new - rq) < tol * max(1.0, abs(new))
            rq = new
            if done or it >= maxiter:
                converged = done
                break
        if converged or it >= maxiter:
            break
        # λ₁ lies in [sigma, rq]: move the certified shift toward it
        upper = rq
        for _ in range(8):
            trial = sigma + 0.5 * (upper - sigma)
            below, lu_t = count_below(mesh, alpha, trial)
            if below == 0:
                sigma, lu = trial, lu_t
                break
            upper = trial
    if not converged:
        res = np.linalg.norm(A @ x - rq * (M @ x))
        raise SolverError(f"inverse iteration did not converge in {maxiter} steps; residual {res:.3e}")
    if np.sum(x) < 0:
        x = -x
    res = float(np.linalg.norm(A @ x - rq * (M @ x)))
    return EigenResult(lam=float(rq), field=ScalarField(mesh, x), rayleigh_residual=res, iterations=it, shift=sigma)


def _interior_factor(mesh):
    cache = mesh.__dict__.get("_dirichlet_cache")
    if cache is None:
        K, _, _ = _matrices(mesh)
        free = np.nonzero(~mesh.is_boundary)[0]
        fixed = np.nonzero(mesh.is_boundary)[0]
        K = K.tocsr()
        Kii = K[free][:, free].tocsc()
        Kib = K[free][:, fixed].tocsr()
        cache = (free, fixed, sla.splu(Kii), Kib)
        object.__setattr__(mesh, "_dirichlet_cache", cache)
    return cache


def dirichlet_solve(mesh, boundary_values):
    """Discrete harmonic extension of boundary data.

    ``boundary_values`` is either a mapping ``node -> value`` covering every
    boundary node, or a length-``n_nodes`` array whose boundary entries are
    used.
    """
    free, fixed, lu, Kib = _interior_factor(mesh)
    if isinstance(boundary_values, dict):
        g = np.array([boundary_values[int(i)] for i in fixed], dtype=float)
    else:
        g = np.asarray(boundary_values, dtype=float)[fixed]
    if not np.all(np.isfinite(g)):
        raise ValueError("boundary data must be finite")
    u = np.empty(mesh.n_nodes)
    u[fixed] = g
    u[free] = lu.solve(-(Kib @ g)) if len(free) else []
    return ScalarField(mesh, u)


def harmonic_extension_operator(mesh):
    """Dense ``(n_nodes, n_boundary)`` map from boundary data to the discrete
    harmonic extension; columns follow ``np.nonzero(mesh.is_boundary)``."""
    cache = mesh.__dict__.get("_extension_cache")
    if cache is None:
        free, fixed, lu, Kib = _interior_factor(mesh)
        E = np.zeros((mesh.n_nodes, len(fixed)))
        E[fixed, np.arange(len(fixed))] = 1.0
        if len(free):
            E[free] = lu.solve(-Kib.toarray())
        cache = (E, fixed)
        object.__setattr__(mesh, "_extension_cache", cache)
    return cache


def _boundary_vector(mesh, flux):
    if isinstance(flux, dict):
        f = np.zeros(mesh.n_nodes)
        for i, v in flux.items():
            f[int(i)] = v
        return f
    f = np.asarray(flux, dtype=float)
    if f.ndim == 0:
        return np.full(mesh.n_nodes, float(f))
    return f


def helmholtz_neumann_solve(mesh, c2, flux):
    """Solve ``(K + c²M) u = B g`` for the boundary flux ``g``.

    This is ``-Δu + c²u = 0`` with ``∂_ν u = g``. ``flux`` may be a scalar, a
    node array or a mapping ``boundary node -> value``.
    """
    if not c2 > 0:
        raise ValueError(f"c2 must be positive, got {c2!r}")
    K, M, B = _matrices(mesh)
    g = _boundary_vector(mesh, flux)
    u = sla.spsolve((K + c2 * M).tocsc(), B @ g)
    return ScalarField(mesh, u)


# edge-midpoint rule, exact for quadratics on triangles
_MID = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
_G2 = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


def quadrature_operator(mesh):
    """Sparse ``P`` and weights ``w`` with ``∫f(u) ≈ w · f(P u)``."""
    cache = mesh.__dict__.get("_quad_cache")
    if cache is None:
        T = len(mesh.triangles)
        rows = np.repeat(np.arange(3 * T), 3)
        cols = np.repeat(mesh.triangles, 3, axis=0).ravel()
        vals = np.tile(_MID, (T, 1)).ravel()
        P = sp.csr_matrix((vals, (rows, cols)), shape=(3 * T, mesh.n_nodes))
        w = np.repeat(mesh.areas / 3.0, 3)
        cache = (P, w)
        object.__setattr__(mesh, "_quad_cache", cache)
    return cache


def field_integrals(field, f):
    """``(∫_Ω f(u) dx, ∮_∂Ω f(u) dS, ∫_Ω |∇u|² dx)`` for a P1 field.

    Volume term: 3-point edge-midpoint rule per triangle. Boundary term:
    2-point Gauss per edge. The Dirichlet energy is exact.
    """
    mesh = field.mesh
    u = field.values
    P, w = quadrature_operator(mesh)
    vol = float(w @ f(P @ u))
    e = mesh.boundary_edges
    ua, ub = u[e[:, 0]], u[e[:, 1]]
    L = mesh.edge_lengths
    bnd = 0.0
    for s in _G2:
        bnd += float(np.sum(0.5 * L * f((1.0 - s) * ua + s * ub)))
    K, _, _ = _matrices(mesh)
    energy = float(u @ (K @ u))
    return vol, bnd, energy
