"""Triangulation of planar domains and the plain-text mesh format."""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import triangle as tr

from .domains import DomainSpec

__all__ = ["Mesh", "MeshError", "triangulate", "write_mesh", "read_mesh", "locate"]

MIN_ANGLE_DEG = 20.0


class MeshError(RuntimeError):
    """Mesh generation or validation failure."""


@dataclass(frozen=True, eq=False)
class Mesh:
    """P1 triangulation.

    ``boundary_edges`` is a closed loop oriented counterclockwise, so the
    outward normal of edge ``(i, j)`` is the tangent rotated clockwise.
    ``boundary_theta`` holds the polar parameter of each boundary node (in
    loop order) when the mesh was built from a star domain.
    """

    points: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    h: float
    spec: DomainSpec = None
    boundary_theta: np.ndarray = None

    def __post_init__(self):
        p = np.ascontiguousarray(self.points, dtype=float)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        e = np.ascontiguousarray(self.boundary_edges, dtype=np.int64)
        a = _signed_areas(p, t)
        if np.any(a < 0):
            t = t.copy()
            neg = a < 0
            t[neg] = t[neg][:, [0, 2, 1]]
            a = np.abs(a)
        if np.any(a <= 0.0):
            raise MeshError("degenerate triangle (zero area)")
        for name, val in (("points", p), ("triangles", t), ("boundary_edges", e)):
            val.flags.writeable = False
            object.__setattr__(self, name, val)
        a.flags.writeable = False
        object.__setattr__(self, "areas", a)
        counts = np.bincount(e.ravel(), minlength=len(p))
        if np.any(counts[counts > 0] != 2):
            raise MeshError("boundary edges do not form closed loops")

    @property
    def n_nodes(self):
        return len(self.points)

    @cached_property
    def area(self):
        return float(np.sum(self.areas))

    @cached_property
    def edge_vectors(self):
        p = self.points
        return p[self.boundary_edges[:, 1]] - p[self.boundary_edges[:, 0]]

    @cached_property
    def edge_lengths(self):
        return np.hypot(*self.edge_vectors.T)

    @cached_property
    def edge_normals(self):
        d = self.edge_vectors / self.edge_lengths[:, None]
        return np.stack([d[:, 1], -d[:, 0]], axis=1)

    @cached_property
    def perimeter(self):
        return float(np.sum(self.edge_lengths))

    @cached_property
    def boundary_nodes(self):
        """Boundary node indices in loop order (first loop only if several)."""
        e = self.boundary_edges
        nxt = dict(zip(e[:, 0].tolist(), e[:, 1].tolist()))
        start = int(e[0, 0])
        order = [start]
        cur = nxt[start]
        while cur != start:
            order.append(cur)
            cur = nxt[cur]
        return np.array(order)

    @cached_property
    def is_boundary(self):
        m = np.zeros(self.n_nodes, dtype=bool)
        m[self.boundary_edges.ravel()] = True
        return m

    @cached_property
    def gradients(self):
        """Gradients of the three hat functions on each triangle, ``(T, 3, 2)``."""
        p = self.points[self.triangles]
        x, y = p[..., 0], p[..., 1]
        b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        return np.stack([b, c], axis=-1) / (2.0 * self.areas)[:, None, None]

    def min_angle(self):
        """Smallest interior angle in degrees."""
        p = self.points[self.triangles]
        ang = []
        for i in range(3):
            u = p[:, (i + 1) % 3] - p[:, i]
            v = p[:, (i + 2) % 3] - p[:, i]
            cosang = np.sum(u * v, axis=1) / (np.hypot(*u.T) * np.hypot(*v.T))
            ang.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
        return float(np.min(ang))

    def max_edge(self):
        p = self.points[self.triangles]
        return float(max(np.max(np.hypot(*(p[:, (i + 1) % 3] - p[:, i]).T)) for i in range(3)))


def _signed_areas(p, t):
    a = p[t[:, 1]] - p[t[:, 0]]
    b = p[t[:, 2]] - p[t[:, 0]]
    return 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])


def _boundary_samples(spec, h):
    if spec.kind == "star":
        count = max(12, int(math.ceil(spec.perimeter() / h)))
        theta = spec.arclength_parameters(count)
        return spec.point(theta), theta
    verts = np.asarray(spec.vertices)
    pts = []
    for i in range(len(verts)):
        a, b = verts[i], verts[(i + 1) % len(verts)]
        m = max(1, int(math.ceil(np.hypot(*(b - a)) / h)))
        s = np.arange(m)[:, None] / m
        pts.append(a + s * (b - a))
    return np.concatenate(pts), None


def triangulate(spec, h, *, min_angle=MIN_ANGLE_DEG):
    """Boundary-conforming quality triangulation of ``spec`` at size ``h``.

    Boundary nodes are placed exactly on the analytic boundary (star domains,
    equally spaced in arc length) or on the polygon edges, and no further
    points are inserted on the boundary. Interior points come from
    constrained Delaunay refinement with a minimum-angle bound.

    Raises
    ------
    MeshError
        If ``h`` is out of range or the angle bound is not met.
    """
    if not 0 < h < spec.diameter() / 4:
        raise MeshError(f"h={h} must lie in (0, diameter/4)")
    bpts, theta = _boundary_samples(spec, h)
    nb = len(bpts)
    seg = np.stack([np.arange(nb), (np.arange(nb) + 1) % nb], axis=1)
    max_area = math.sqrt(3.0) / 4.0 * h * h
    out = tr.triangulate({"vertices": bpts, "segments": seg}, f"pq{min_angle:g}a{max_area:.17g}YQ")
    pts = out["vertices"]
    tris = out["triangles"]
    if not np.array_equal(pts[:nb], bpts):
        raise MeshError("boundary points were moved by the mesher")
    if len(pts) and np.any(out.get("vertex_markers", np.zeros(1))[nb:] == 1):
        raise MeshError(f"boundary was split at h={h}")
    mesh = Mesh(pts, tris, seg, h, spec=spec, boundary_theta=theta)
    ang = mesh.min_angle()
    if ang < min_angle - 1e-9:
        raise MeshError(f"minimum angle {ang:.2f} deg below {min_angle} deg at h={h}; refine h")
    return mesh


def locate(mesh, pt):
    """Triangle index containing ``pt`` and its barycentric coordinates.

    Returns ``(-1, None)`` when the point lies outside the mesh.
    """
    pt = np.asarray(pt, dtype=float)
    p = mesh.points[mesh.triangles]
    v0 = p[:, 0]
    d1 = p[:, 1] - v0
    d2 = p[:, 2] - v0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    w = pt - v0
    l1 = (w[:, 0] * d2[:, 1] - w[:, 1] * d2[:, 0]) / det
    l2 = (d1[:, 0] * w[:, 1] - d1[:, 1] * w[:, 0]) / det
    l0 = 1.0 - l1 - l2
    lam = np.stack([l0, l1, l2], axis=1)
    score = lam.min(axis=1)
    i = int(np.argmax(score))
    if score[i] < -1e-12:
        return -1, None
    return i, lam[i]


def write_mesh(mesh, path):
    """Write the plain-text format.

    Header ``"<N> nodes <T> triangles <B> boundary-edges"``, then N coordinate
    lines, T index triples and B boundary edge pairs (0-based).
    """
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_nodes} nodes {len(mesh.triangles)} triangles {len(mesh.boundary_edges)} boundary-edges\n")
        for x, y in mesh.points:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        for a, b in mesh.boundary_edges:
            fh.write(f"{a} {b}\n")


def read_mesh(path, h=None):
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 6 or head[1] != "nodes" or head[3] != "triangles" or head[5] != "boundary-edges":
            raise MeshError(f"bad mesh header: {' '.join(head)!r}")
        n, t, b = int(head[0]), int(head[2]), int(head[4])
        rows = [line.split() for line in fh if line.strip()]
    if len(rows) != n + t + b:
        raise MeshError("mesh file length does not match header")
    pts = np.array(rows[:n], dtype=float)
    tris = np.array(rows[n : n + t], dtype=np.int64)
    edges = np.array(rows[n + t :], dtype=np.int64)
    mesh = Mesh(pts, tris, edges, 0.0)
    object.__setattr__(mesh, "h", float(h) if h is not None else mesh.max_edge())
    return mesh
