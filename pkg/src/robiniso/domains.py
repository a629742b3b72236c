"""Analytic descriptions of planar domains.

Two kinds are supported: star-shaped domains with boundary
``r(θ) = R (1 + Σ a_k cos kθ + Σ b_k sin kθ)`` and simple polygons given by
their counterclockwise vertex list.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["DomainSpec", "DomainError"]

_CHECK_GRID = 4096
_ARC_GRID = 8192


class DomainError(ValueError):
    """Invalid domain description."""


def _segments_intersect(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    R: float = 1.0
    cos: tuple = ()
    sin: tuple = ()
    vertices: tuple = field(default=())

    def __post_init__(self):
        if self.kind == "star":
            object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
            object.__setattr__(self, "sin", tuple(float(c) for c in self.sin))
            if not self.R > 0:
                raise DomainError(f"base radius must be positive, got {self.R!r}")
            th = np.linspace(0.0, 2.0 * np.pi, _CHECK_GRID, endpoint=False)
            if np.min(self.radius(th)) <= 0.0:
                raise DomainError("star boundary radius is not positive everywhere")
        elif self.kind == "polygon":
            verts = tuple((float(x), float(y)) for x, y in self.vertices)
            object.__setattr__(self, "vertices", verts)
            if len(verts) < 3:
                raise DomainError("polygon needs at least 3 vertices")
            if self._signed_area() <= 0.0:
                raise DomainError("polygon vertices must be counterclockwise")
            m = len(verts)
            for i in range(m):
                for j in range(i + 1, m):
                    if j == i + 1 or (i == 0 and j == m - 1):
                        continue
                    if _segments_intersect(verts[i], verts[(i + 1) % m], verts[j], verts[(j + 1) % m]):
                        raise DomainError("polygon is not simple")
        else:
            raise DomainError(f"unknown domain kind {self.kind!r}")

    # constructors -------------------------------------------------------

    @classmethod
    def disk(cls, R=1.0):
        return cls("star", R=R)

    @classmethod
    def star(cls, R, cos=(), sin=()):
        return cls("star", R=R, cos=tuple(cos), sin=tuple(sin))

    @classmethod
    def polygon(cls, vertices):
        return cls("polygon", vertices=tuple(map(tuple, vertices)))

    @classmethod
    def square(cls, side=1.0, origin=(0.0, 0.0)):
        x0, y0 = origin
        return cls.polygon([(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)])

    @classmethod
    def ellipse(cls, a, b, samples=4096, tol=1e-15):
        """Ellipse with semi-axes ``a`` (x) and ``b`` (y) as a star domain.

        The polar radius ``ab / sqrt(b² cos²θ + a² sin²θ)`` is expanded in a
        cosine series by FFT; coefficients below ``tol`` (relative) are cut.
        """
        th = 2.0 * np.pi * np.arange(samples) / samples
        r = a * b / np.sqrt((b * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2)
        c = np.fft.rfft(r) / samples
        R = float(c[0].real)
        coeffs = 2.0 * c[1:].real / R
        keep = np.nonzero(np.abs(coeffs) > tol)[0]
        last = int(keep[-1]) + 1 if keep.size else 0
        return cls("star", R=R, cos=tuple(coeffs[:last]))

    # geometry -----------------------------------------------------------

    def _modes(self):
        ka = np.arange(1, len(self.cos) + 1)
        kb = np.arange(1, len(self.sin) + 1)
        return ka, np.asarray(self.cos), kb, np.asarray(self.sin)

    def radius(self, theta, deriv=0):
        """Star boundary radius ``r(θ)`` or its ``deriv``-th derivative."""
        if self.kind != "star":
            raise DomainError("radius() is defined for star domains only")
        theta = np.asarray(theta, dtype=float)
        ka, a, kb, b = self._modes()
        ca = np.cos(np.multiply.outer(theta, ka))
        sa = np.sin(np.multiply.outer(theta, ka))
        cb = np.cos(np.multiply.outer(theta, kb))
        sb = np.sin(np.multiply.outer(theta, kb))
        if deriv == 0:
            s = 1.0 + ca @ a + sb @ b
        elif deriv == 1:
            s = -sa @ (ka * a) + cb @ (kb * b)
        elif deriv == 2:
            s = -ca @ (ka**2 * a) - sb @ (kb**2 * b)
        else:
            raise ValueError("deriv must be 0, 1 or 2")
        return self.R * s

    def point(self, theta):
        r = self.radius(theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def curvature(self, theta):
        """Signed curvature of a star boundary, positive for convex arcs."""
        r = self.radius(theta)
        r1 = self.radius(theta, 1)
        r2 = self.radius(theta, 2)
        return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5

    def speed(self, theta):
        """``|dx/dθ| = sqrt(r² + r'²)``."""
        return np.hypot(self.radius(theta), self.radius(theta, 1))

    def normal(self, theta):
        """Outward unit normal ``(r e_r - r' e_θ) / sqrt(r² + r'²)``."""
        r = self.radius(theta)
        r1 = self.radius(theta, 1)
        c, s = np.cos(theta), np.sin(theta)
        nx = r * c + r1 * s
        ny = r * s - r1 * c
        d = np.hypot(nx, ny)
        return np.stack([nx / d, ny / d], axis=-1)

    def _signed_area(self):
        v = np.asarray(self.vertices)
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def area(self):
        if self.kind == "polygon":
            return self._signed_area()
        return math.pi * self.R**2 * (1.0 + 0.5 * (sum(c * c for c in self.cos) + sum(s * s for s in self.sin)))

    def perimeter(self):
        if self.kind == "polygon":
            v = np.asarray(self.vertices)
            return float(np.sum(np.hypot(*(np.roll(v, -1, axis=0) - v).T)))
        th = 2.0 * np.pi * np.arange(_ARC_GRID) / _ARC_GRID
        # periodic trapezoid rule, spectrally accurate
        return float(np.mean(self.speed(th)) * 2.0 * np.pi)

    def diameter(self):
        if self.kind == "polygon":
            pts = np.asarray(self.vertices)
        else:
            th = np.linspace(0.0, 2.0 * np.pi, 1024, endpoint=False)
            pts = self.point(th)
        d = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))

    def arclength_parameters(self, count):
        """Angles of ``count`` boundary points equally spaced in arc length."""
        m = _ARC_GRID
        th = 2.0 * np.pi * np.arange(m + 1) / m
        sp = self.speed(th)
        s = np.concatenate([[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]) * (2.0 * np.pi / m))])
        targets = s[-1] * np.arange(count) / count
        theta = np.interp(targets, s, th)
        # one Newton sweep on s(θ) = target using the exact speed
        for _ in range(3):
            s_theta = np.interp(theta, th, s)
            theta = theta - (s_theta - targets) / self.speed(theta)
        return theta

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        if self.kind == "star":
            th = np.arctan2(pts[:, 1], pts[:, 0])
            return np.hypot(pts[:, 0], pts[:, 1]) < self.radius(th)
        v = np.asarray(self.vertices)
        x, y = pts[:, 0][:, None], pts[:, 1][:, None]
        x0, y0 = v[:, 0], v[:, 1]
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        return np.count_nonzero(crosses & (x < xi), axis=1) % 2 == 1

    # serialisation ------------------------------------------------------

    def to_dict(self):
        if self.kind == "star":
            return {"kind": "star", "R": self.R, "cos": list(self.cos), "sin": list(self.sin)}
        return {"kind": "polygon", "vertices": [list(v) for v in self.vertices]}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        if kind == "star":
            return cls("star", R=float(d["R"]), cos=tuple(d.get("cos", ())), sin=tuple(d.get("sin", ())))
        if kind == "polygon":
            return cls.polygon(d["vertices"])
        if kind == "ellipse":
            return cls.ellipse(float(d["a"]), float(d["b"]))
        raise DomainError(f"unknown domain kind {kind!r}")

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))
