"""Exact low-dimensional convex geometry.

Hulls, scaled Minkowski combinations, Lebesgue measure and horizontal
slices of lifted bodies. Points live in dimension at most 3, which covers
base dimension ``n <= 2`` plus one lifted height coordinate.

All objects are immutable after construction.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull

__all__ = [
    "TOL",
    "UnsupportedDimensionError",
    "VPolytope",
    "BodyKind",
    "LiftedBody",
    "CoefficientBody",
    "hull",
    "hull_indices",
    "minkowski_lambda",
    "measure",
    "slice",
    "slice_measure",
    "matrix_times",
]

#: Coordinate tolerance used for vertex deduplication and collinearity.
TOL = 1e-12


class UnsupportedDimensionError(ValueError):
    """Raised for point sets of dimension larger than 3."""


def _as_points(points, dim=None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if dim in (None, 1) else pts.reshape(1, -1)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array of shape (k, dim)")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {pts.shape[1]}")
    if pts.shape[1] > 3:
        raise UnsupportedDimensionError(f"dimension {pts.shape[1]} > 3 is not supported")
    if pts.shape[1] < 1:
        raise ValueError("points must have at least one coordinate")
    return pts


def _scale(pts: np.ndarray) -> float:
    if len(pts) == 0:
        return 1.0
    return max(1.0, float(np.max(np.abs(pts))))


def _lexsort(pts: np.ndarray) -> np.ndarray:
    # np.lexsort sorts by the last key first
    return np.lexsort(pts.T[::-1])


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(pts2: np.ndarray) -> list[int]:
    """Andrew's monotone chain on 2-D points; CCW from the lexicographic minimum.

    Duplicates and vertices within ``TOL`` of the chord of their
    neighbours are dropped, flattest first, so nearly collinear runs
    resolve the same way regardless of which extra points were present.
    """
    order = _lexsort(pts2)
    if len(order) == 1:
        return [int(order[0])]
    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and _cross(pts2[lower[-2]], pts2[lower[-1]], pts2[i]) <= 0:
            lower.pop()
        lower.append(int(i))
    upper: list[int] = []
    for i in order[::-1]:
        while len(upper) >= 2 and _cross(pts2[upper[-2]], pts2[upper[-1]], pts2[i]) <= 0:
            upper.pop()
        upper.append(int(i))
    chain = lower[:-1] + upper[:-1]
    if not chain:
        chain = [int(order[0])]
    tol = TOL * _scale(pts2)
    # all points coincide: the two chains collapse onto one index
    if len(chain) == 2 and np.allclose(pts2[chain[0]], pts2[chain[1]], atol=tol):
        return chain[:1]
    while len(chain) > 3:
        P = pts2[chain]
        prev, nxt = np.roll(P, 1, axis=0), np.roll(P, -1, axis=0)
        d = nxt - prev
        cr = d[:, 0] * (P[:, 1] - prev[:, 1]) - d[:, 1] * (P[:, 0] - prev[:, 0])
        dist = np.abs(cr) / np.maximum(np.hypot(d[:, 0], d[:, 1]), tol)
        k = int(np.argmin(dist))
        if dist[k] > tol:
            break
        del chain[k]
    first = int(_lexsort(pts2[chain])[0])
    return chain[first:] + chain[:first]


def _affine_frame(pts: np.ndarray):
    """Return (origin, basis rows, rank) of the affine hull of ``pts``."""
    origin = pts.mean(axis=0)
    centered = pts - origin
    if len(pts) == 1:
        return origin, np.zeros((0, pts.shape[1])), 0
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    cutoff = 1e3 * TOL * _scale(pts) * np.sqrt(len(pts))
    rank = int(np.sum(sv > cutoff))
    return origin, vt[:rank], rank


def hull_indices(points) -> np.ndarray:
    """Indices of the extreme points of ``points`` (dimension <= 3).

    Degenerate inputs are handled by projecting onto their affine hull.
    The order is canonical: CCW from the lexicographic minimum for planar
    2-D input, lexicographic otherwise.
    """
    pts = _as_points(points)
    if len(pts) == 0:
        return np.zeros(0, dtype=int)
    dim = pts.shape[1]
    origin, basis, rank = _affine_frame(pts)
    if rank == 0:
        idx = np.array([_lexsort(pts)[0]])
    elif rank == 1:
        proj = (pts - origin) @ basis[0]
        idx = np.unique([int(np.argmin(proj)), int(np.argmax(proj))])
    elif rank == 2:
        local = pts if dim == 2 else (pts - origin) @ basis.T
        idx = np.array(_monotone_chain(local))
        if dim == 2:
            return idx
    else:
        idx = ConvexHull(pts).vertices
    idx = np.asarray(idx, dtype=int)
    return idx[_lexsort(pts[idx])]


@dataclass(frozen=True, eq=False)
class VPolytope:
    """A convex polytope stored by its minimal, canonically ordered vertex list."""

    dim: int
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, self.dim)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def empty(cls, dim: int) -> VPolytope:
        return cls(dim, np.zeros((0, dim)))

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VPolytope):
            return NotImplemented
        if self.dim != other.dim or self.vertices.shape != other.vertices.shape:
            return False
        scale = max(_scale(self.vertices), _scale(other.vertices))
        return bool(np.allclose(self.vertices, other.vertices, rtol=0, atol=1e3 * TOL * scale))

    def __hash__(self):
        return hash((self.dim, len(self.vertices)))

    def contains(self, x, tol: float = 1e-9) -> bool:
        """Membership test for full-dimensional 1-D and 2-D polytopes."""
        x = np.asarray(x, dtype=float).reshape(self.dim)
        if self.is_empty:
            return False
        if self.dim == 1:
            return bool(self.vertices[0, 0] - tol <= x[0] <= self.vertices[-1, 0] + tol)
        if self.dim == 2 and len(self.vertices) >= 3:
            v = self.vertices
            w = np.roll(v, -1, axis=0)
            cross = (w[:, 0] - v[:, 0]) * (x[1] - v[:, 1]) - (w[:, 1] - v[:, 1]) * (x[0] - v[:, 0])
            lengths = np.hypot(w[:, 0] - v[:, 0], w[:, 1] - v[:, 1])
            return bool(np.all(cross >= -tol * lengths))
        raise NotImplementedError("containment only for 1-D and full-dimensional 2-D")


def hull(points, dim: int | None = None) -> VPolytope:
    """Convex hull of a finite point set as a canonical :class:`VPolytope`."""
    pts = _as_points(points, dim)
    if len(pts) == 0:
        raise ValueError("hull of an empty point set; use VPolytope.empty")
    return VPolytope(pts.shape[1], pts[hull_indices(pts)])


def minkowski_lambda(P: VPolytope, Q: VPolytope, lam: float) -> VPolytope:
    """The combination ``lam * P + (1 - lam) * Q``."""
    if P.dim != Q.dim:
        raise ValueError(f"dimension mismatch: {P.dim} vs {Q.dim}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    if P.is_empty or Q.is_empty:
        return VPolytope.empty(P.dim)
    sums = lam * P.vertices[:, None, :] + (1.0 - lam) * Q.vertices[None, :, :]
    return hull(sums.reshape(-1, P.dim))


def _polygon_area(v: np.ndarray) -> float:
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def measure(P: VPolytope) -> float:
    """Length, area or volume; zero for lower-dimensional polytopes."""
    v = P.vertices
    if len(v) < P.dim + 1:
        return 0.0
    if P.dim == 1:
        return float(v[:, 0].max() - v[:, 0].min())
    if P.dim == 2:
        return _polygon_area(v)
    _, _, rank = _affine_frame(v)
    if rank < 3:
        return 0.0
    return float(ConvexHull(v).volume)


class BodyKind(enum.Enum):
    EPIGRAPH = "epigraph"
    HYPOGRAPH = "hypograph"


def _envelope_1d(x: np.ndarray, y: np.ndarray, upper: bool) -> np.ndarray:
    """Indices of the upper (concave) or lower (convex) envelope chain, sorted by x."""
    sign = 1.0 if upper else -1.0
    order = np.lexsort((-sign * y, x))
    # one candidate per x: the dominant height
    keep = [order[0]]
    for i in order[1:]:
        if abs(x[i] - x[keep[-1]]) > TOL * _scale(x):
            keep.append(i)
    eps = TOL * max(_scale(x), _scale(y)) ** 2
    chain: list[int] = []
    for i in keep:
        while len(chain) >= 2:
            o, a = chain[-2], chain[-1]
            c = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o])
            if sign * c >= -eps:
                chain.pop()
            else:
                break
        chain.append(int(i))
    return np.asarray(chain, dtype=int)


@dataclass(frozen=True, eq=False)
class LiftedBody:
    """Finitely generated convex body in base-dim + 1 space.

    ``points[i]`` is the base location of generator ``i`` and
    ``heights[i]`` its lifted height. An epigraph body is the hull of the
    generators plus the upward vertical cone; a hypograph body is the hull of
    the generators together with their feet ``(x_i, 0)``.

    Use :meth:`build` to construct; it prunes generators to the vertices of
    the relevant envelope and stores them in lexicographic order.
    """

    base_dim: int
    points: np.ndarray
    heights: np.ndarray
    kind: BodyKind

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.base_dim)
        h = np.asarray(self.heights, dtype=float).reshape(-1)
        pts.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "heights", h)

    @classmethod
    def build(cls, points, heights, kind: BodyKind) -> LiftedBody:
        kind = BodyKind(kind)
        h = np.asarray(heights, dtype=float).reshape(-1)
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(len(h), -1) if len(h) else pts.reshape(0, 1)
        if len(h) == 0 or len(pts) != len(h):
            raise ValueError("generator list must be non-empty with one height per point")
        base_dim = pts.shape[1]
        if base_dim not in (1, 2):
            raise UnsupportedDimensionError(f"base dimension {base_dim} not in {{1, 2}}")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(h))):
            raise ValueError("generators must be finite")
        if kind is BodyKind.HYPOGRAPH and np.any(h < 0):
            raise ValueError("hypograph heights must be >= 0")
        idx = _reduce(pts, h, kind)
        pts, h = pts[idx], h[idx]
        order = np.lexsort(np.column_stack([pts, h]).T[::-1])
        return cls(base_dim, pts[order], h[order], kind)

    @property
    def generators(self) -> np.ndarray:
        """Generators as rows ``(x, height)``."""
        return np.column_stack([self.points, self.heights])

    def __len__(self) -> int:
        return len(self.heights)

    def allclose(self, other: LiftedBody, atol: float = 1e-9) -> bool:
        return (
            self.kind is other.kind
            and self.base_dim == other.base_dim
            and self.points.shape == other.points.shape
            and bool(np.allclose(self.generators, other.generators, rtol=0, atol=atol))
        )

    @cached_property
    def base(self) -> VPolytope:
        """Projection of the body onto base space, ``conv{x_i}``."""
        return hull(self.points)

    @cached_property
    def _facets(self):
        # (normals (m, base_dim), offsets (m,)) of envelope planes: height = a.x + b
        pts = self.points
        h = self.heights
        if self.kind is BodyKind.HYPOGRAPH:
            cloud = np.vstack([np.column_stack([pts, h]), np.column_stack([pts, np.zeros_like(h)])])
        else:
            lift = 1.0 + 2.0 * (np.ptp(h) + 1.0)
            cloud = np.vstack([np.column_stack([pts, h]), np.column_stack([pts, h + lift])])
        _, _, rank = _affine_frame(cloud)
        if rank < 3:
            return None
        eq = ConvexHull(cloud).equations
        c = eq[:, 2]
        sel = c > 1e-9 if self.kind is BodyKind.HYPOGRAPH else c < -1e-9
        eq = eq[sel]
        return -eq[:, :2] / eq[:, 2:3], -eq[:, 3] / eq[:, 2]

    def envelope(self, x) -> np.ndarray:
        """Upper (hypograph) or lower (epigraph) boundary height at base points.

        NaN outside the base projection.
        """
        x = np.asarray(x, dtype=float)
        if self.base_dim == 1:
            xq = x.reshape(-1)
            xs, hs = self.points[:, 0], self.heights
            vals = np.interp(xq, xs, hs)
            tol = 1e-12 * _scale(xs)
            vals[(xq < xs[0] - tol) | (xq > xs[-1] + tol)] = np.nan
            return vals.reshape(x.shape[:-1] if x.ndim > 1 and x.shape[-1] == 1 else x.shape)
        xq = x.reshape(-1, 2)
        facets = self._facets
        if facets is None:
            vals = np.array([_envelope_lp(self, p) for p in xq])
        else:
            a, b = facets
            planes = xq @ a.T + b
            vals = planes.min(axis=1) if self.kind is BodyKind.HYPOGRAPH else planes.max(axis=1)
            base = self.base
            inside = np.array([base.contains(p, tol=1e-10) for p in xq]) if len(base) >= 3 else np.zeros(len(xq), bool)
            vals = np.where(inside, vals, np.nan)
        return vals.reshape(x.shape[:-1])


def _envelope_lp(body: LiftedBody, p: np.ndarray) -> float:
    from scipy.optimize import linprog

    k = len(body)
    sign = -1.0 if body.kind is BodyKind.HYPOGRAPH else 1.0
    res = linprog(
        sign * body.heights,
        A_eq=np.vstack([body.points.T, np.ones((1, k))]),
        b_eq=np.concatenate([p, [1.0]]),
        bounds=[(0, None)] * k,
        method="highs",
    )
    return float(sign * res.fun) if res.status == 0 else np.nan


def _reduce(pts: np.ndarray, h: np.ndarray, kind: BodyKind) -> np.ndarray:
    """Indices of generators that are vertices of the relevant envelope."""
    k = len(h)
    if pts.shape[1] == 1:
        return _envelope_1d(pts[:, 0], h, upper=kind is BodyKind.HYPOGRAPH)
    if kind is BodyKind.HYPOGRAPH:
        cloud = np.vstack([np.column_stack([pts, h]), np.column_stack([pts, np.zeros(k)])])
    else:
        lift = 1.0 + 2.0 * (np.ptp(h) + 1.0)
        cloud = np.vstack([np.column_stack([pts, h]), np.column_stack([pts, h + lift])])
    v = hull_indices(cloud)
    keep = np.unique(v % k)
    # duplicate base locations: keep the dominant height only
    sign = 1.0 if kind is BodyKind.HYPOGRAPH else -1.0
    keep = keep[np.lexsort((-sign * h[keep], pts[keep, 1], pts[keep, 0]))]
    out = [keep[0]]
    for i in keep[1:]:
        if np.max(np.abs(pts[i] - pts[out[-1]])) > TOL * _scale(pts):
            out.append(i)
    return np.asarray(out, dtype=int)


def _crossings(pts: np.ndarray, h: np.ndarray, z: float) -> np.ndarray:
    i, j = np.triu_indices(len(h), k=1)
    hi, hj = h[i] - z, h[j] - z
    m = hi * hj < 0
    i, j = i[m], j[m]
    tau = (z - h[i]) / (h[j] - h[i])
    return pts[i] + tau[:, None] * (pts[j] - pts[i])


def slice(B: LiftedBody, z: float) -> VPolytope:
    """Horizontal slice ``{x : (x, z) in B}`` as a polytope in base space."""
    pts, h = B.points, B.heights
    if B.kind is BodyKind.HYPOGRAPH:
        if z < 0:
            return VPolytope.empty(B.base_dim)
        side = h >= z
    else:
        side = h <= z
    cand = np.vstack([pts[side], _crossings(pts, h, z)])
    if len(cand) == 0:
        return VPolytope.empty(B.base_dim)
    return hull(cand)


def slice_measure(B: LiftedBody, z) -> np.ndarray:
    """Vectorized ``measure(slice(B, z))`` over an array of levels."""
    z = np.asarray(z, dtype=float)
    flat = z.reshape(-1)
    if B.base_dim == 1:
        out = _slice_lengths_1d(B, flat)
    else:
        out = np.array([measure(slice(B, float(zz))) for zz in flat])
    return out.reshape(z.shape)


def _slice_lengths_1d(B: LiftedBody, z: np.ndarray) -> np.ndarray:
    # generators of a reduced 1-D body form the envelope chain in x order
    xs, hs = B.points[:, 0], B.heights
    if B.kind is BodyKind.HYPOGRAPH:
        peak_l = int(np.argmax(hs))
        peak_r = len(hs) - 1 - int(np.argmax(hs[::-1]))
        left = np.interp(z, hs[: peak_l + 1], xs[: peak_l + 1])
        right = np.interp(-z, -hs[peak_r:], xs[peak_r:])
        length = right - left
        length[(z > hs.max()) | (z < 0)] = 0.0
    else:
        low_l = int(np.argmin(hs))
        low_r = len(hs) - 1 - int(np.argmin(hs[::-1]))
        left = np.interp(-z, -hs[: low_l + 1], xs[: low_l + 1])
        right = np.interp(z, hs[low_r:], xs[low_r:])
        length = right - left
        length[z < hs.min()] = 0.0
    return np.maximum(length, 0.0)


@dataclass(frozen=True, eq=False)
class CoefficientBody:
    """Compact convex coefficient set ``C`` in the closed positive orthant of R^N."""

    N: int
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, self.N)
        if len(v) == 0:
            raise ValueError("coefficient body needs at least one vertex")
        if np.any(v < -TOL):
            raise ValueError("coefficient body must lie in the positive orthant")
        v = np.clip(v, 0.0, None)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def simplex(cls, N: int) -> CoefficientBody:
        """``conv{e_1, ..., e_N}``."""
        return cls(N, np.eye(N))

    @classmethod
    def hat_sum(cls, N: int, M: int, lam: float) -> CoefficientBody:
        """``C_N +_lam C^_M`` in R^(N+M), with ``C^_M = conv{e_{N+1}, ..., e_{N+M}}``."""
        e = np.eye(N + M)
        v = lam * e[:N, None, :] + (1.0 - lam) * e[None, N:, :]
        return cls(N + M, v.reshape(-1, N + M))


def matrix_times(points, C: CoefficientBody) -> VPolytope:
    """``[x_1, ..., x_N] C``: the image of ``C`` under the matrix with columns ``x_i``."""
    pts = _as_points(points)
    if len(pts) != C.N:
        raise ValueError(f"need {C.N} points, got {len(pts)}")
    return hull(C.vertices @ pts)
