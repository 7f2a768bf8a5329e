"""Power means, analytic s-concave families and rearrangements.

The families here are radial profiles ``h * phi(||x - c|| / r)`` for a
choice of norm (l1, l2 or l-infinity) plus indicators of convex polytopes.
Each has a closed-form integral, level-set measure, and bounding box,
which makes them usable both as ground truth and as sampling targets.

``GridFn`` is a plain uniform-grid function used by the numeric oracles:
the grid sup-convolution and the per-line Steiner symmetral.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from .convex_kernel import VPolytope, hull, measure

__all__ = [
    "SParam",
    "power_mean",
    "m_mean",
    "Family",
    "SConcaveFn",
    "evaluate",
    "integral_closed_form",
    "level_set_measure",
    "rearrange",
    "GridFn",
    "steiner_symmetral",
    "sup_convolution_grid",
]


@dataclass(frozen=True)
class SParam:
    """Concavity index ``s`` and mixing weight ``lam`` for base dimension ``n``.

    ``s`` must satisfy ``s > -1/n`` and be finite; ``lam`` lies in (0, 1).
    """

    s: float
    lam: float = 0.5
    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("base dimension must be >= 1")
        if not math.isfinite(self.s) or self.s <= -1.0 / self.n:
            raise ValueError(f"s must be finite and > -1/n = {-1.0 / self.n}, got {self.s}")
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must lie in (0, 1), got {self.lam}")

    @property
    def is_log(self) -> bool:
        return self.s == 0.0

    @property
    def bbl_exponent(self) -> float:
        """The exponent ``s / (1 + n s)`` of the integrated mean."""
        return self.s / (1.0 + self.n * self.s)

    def mean(self, a, b):
        return power_mean(a, b, self.s, self.lam)


def power_mean(a, b, s: float, lam: float):
    """Weighted power mean ``(lam a^s + (1-lam) b^s)^(1/s)``, zero if ``ab = 0``.

    ``s = 0`` gives the geometric mean, ``s = +inf`` the max and
    ``s = -inf`` the min. Works elementwise on arrays.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("power_mean takes non-negative arguments")
    a, b = np.broadcast_arrays(a, b)
    out = np.zeros(a.shape)
    pos = (a > 0) & (b > 0)
    ap, bp = a[pos], b[pos]
    if s == 0:
        out[pos] = ap**lam * bp ** (1.0 - lam)
    elif s == np.inf:
        out[pos] = np.maximum(ap, bp)
    elif s == -np.inf:
        out[pos] = np.minimum(ap, bp)
    else:
        # factor out the argument that keeps s * log(ratio) <= 0, then work in
        # log space so that tiny |s| does not cancel
        m = np.maximum(ap, bp) if s > 0 else np.minimum(ap, bp)
        la, lb = np.log(ap / m), np.log(bp / m)
        if abs(s) < 1e-12:
            mean_log = lam * la + (1.0 - lam) * lb
            log_ratio = mean_log + 0.5 * s * lam * (1.0 - lam) * (la - lb) ** 2
        else:
            log_ratio = np.log1p(lam * np.expm1(s * la) + (1.0 - lam) * np.expm1(s * lb)) / s
        out[pos] = m * np.exp(log_ratio)
    return out[()] if out.ndim == 0 else out


def m_mean(p: SParam, a, b):
    """``M_lam^s(a, b)`` for the parameters carried by ``p``."""
    return power_mean(a, b, p.s, p.lam)


class Family(str, enum.Enum):
    INDICATOR = "indicator"
    BALL = "ball"
    CAP = "cap"
    NEGCAP = "negcap"
    LOGGAUSS = "loggauss"
    LOGTENT = "logtent"


def _ball_area(n: int, norm: float) -> float:
    if n == 1:
        return 2.0
    return {1.0: 2.0, 2.0: math.pi, math.inf: 4.0}[float(norm)]


def _norm(d: np.ndarray, norm: float) -> np.ndarray:
    if norm == 1:
        return np.abs(d).sum(axis=-1)
    if norm == 2:
        return np.sqrt((d * d).sum(axis=-1))
    return np.abs(d).max(axis=-1)


@dataclass(frozen=True, eq=False)
class SConcaveFn:
    """A member of one of the analytic test families.

    Radial families evaluate ``height * phi(||x - center|| / scale)`` on
    ``||x - center|| <= truncation`` (the support) and zero elsewhere:

    ========  =====================  =========
    family    phi(t)                 s
    ========  =====================  =========
    ball      1 on t <= 1            any
    cap       (1 - t)_+^(1/s)        s > 0
    negcap    (1 + t)^(1/s)          s < 0
    loggauss  exp(-t^2)              0
    logtent   exp(-t)                0
    ========  =====================  =========

    ``indicator`` is ``height`` on a convex polytope.
    Build instances with the classmethod constructors.
    """

    family: Family
    s: float
    center: np.ndarray
    scale: float = 1.0
    height: float = 1.0
    norm: float = 2.0
    truncation: float = math.inf
    polytope: VPolytope | None = field(default=None, repr=False)

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "norm", float(self.norm))
        if self.height <= 0 or self.scale <= 0:
            raise ValueError("height and scale must be positive")
        if self.norm not in (1.0, 2.0, math.inf):
            raise ValueError("norm must be 1, 2 or inf")
        if len(c) not in (1, 2):
            raise ValueError("families are provided for base dimension 1 and 2")
        fam = self.family
        if fam is Family.CAP and not self.s > 0:
            raise ValueError("cap requires s > 0")
        if fam is Family.NEGCAP and not (-1.0 / len(c) < self.s < 0):
            raise ValueError("negcap requires -1/n < s < 0")
        if fam in (Family.LOGGAUSS, Family.LOGTENT) and self.s != 0:
            raise ValueError(f"{fam.value} is declared log-concave (s = 0)")
        if fam in (Family.NEGCAP, Family.LOGGAUSS, Family.LOGTENT) and not math.isfinite(self.truncation):
            raise ValueError(f"{fam.value} needs a finite truncation radius")
        if fam is Family.INDICATOR and self.polytope is None:
            raise ValueError("indicator needs a polytope")

    # constructors -------------------------------------------------------

    @classmethod
    def indicator(cls, vertices, height: float = 1.0, s: float = 1.0) -> SConcaveFn:
        P = vertices if isinstance(vertices, VPolytope) else hull(np.asarray(vertices, float).reshape(len(vertices), -1))
        if measure(P) <= 0:
            raise ValueError("indicator polytope must be full-dimensional")
        return cls(Family.INDICATOR, s, P.vertices.mean(axis=0), height=height, polytope=P)

    @classmethod
    def interval(cls, a: float, b: float, height: float = 1.0, s: float = 1.0) -> SConcaveFn:
        return cls.indicator([[a], [b]], height=height, s=s)

    @classmethod
    def ball(cls, center, radius=1.0, height=1.0, norm=2.0, s: float = 1.0) -> SConcaveFn:
        return cls(Family.BALL, s, center, radius, height, norm, truncation=radius)

    @classmethod
    def cap(cls, center, radius=1.0, height=1.0, s: float = 1.0, norm=2.0) -> SConcaveFn:
        return cls(Family.CAP, s, center, radius, height, norm, truncation=radius)

    @classmethod
    def negcap(cls, center, radius=1.0, height=1.0, s: float = -0.25, truncation=2.0, norm=2.0) -> SConcaveFn:
        return cls(Family.NEGCAP, s, center, radius, height, norm, truncation=truncation)

    @classmethod
    def log_gauss(cls, center, sigma=1.0, height=1.0, truncation=None) -> SConcaveFn:
        R = 10.0 * sigma if truncation is None else truncation
        return cls(Family.LOGGAUSS, 0.0, center, sigma, height, 2.0, truncation=R)

    @classmethod
    def log_tent(cls, center, sigma=1.0, height=1.0, truncation=3.0, norm=1.0) -> SConcaveFn:
        return cls(Family.LOGTENT, 0.0, center, sigma, height, norm, truncation=truncation)

    # basic attributes ---------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def max_value(self) -> float:
        return float(self.height)

    @property
    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.family is Family.INDICATOR:
            v = self.polytope.vertices
            return v.min(axis=0), v.max(axis=0)
        # every supported unit norm ball has unit extent along each axis
        return self.center - self.truncation, self.center + self.truncation

    @property
    def _t_max(self) -> float:
        return self.truncation / self.scale

    def _phi(self, t: np.ndarray) -> np.ndarray:
        fam = self.family
        if fam is Family.BALL:
            return np.ones_like(t)
        if fam is Family.CAP:
            return np.clip(1.0 - t, 0.0, None) ** (1.0 / self.s)
        if fam is Family.NEGCAP:
            return (1.0 + t) ** (1.0 / self.s)
        if fam is Family.LOGGAUSS:
            return np.exp(-t * t)
        return np.exp(-t)

    def _phi_inv(self, y: float) -> float:
        # largest t with phi(t) > y, for 0 < y < 1
        fam = self.family
        if fam is Family.BALL:
            return 1.0
        if fam is Family.CAP:
            return 1.0 - y**self.s
        if fam is Family.NEGCAP:
            return y**self.s - 1.0
        if fam is Family.LOGGAUSS:
            return math.sqrt(-math.log(y))
        return -math.log(y)

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)

    def to_spec(self) -> dict:
        """JSON-ready description, the inverse of the experiment config parser."""
        d: dict = {"family": self.family.value, "height": self.height}
        if self.family is Family.INDICATOR:
            d["vertices"] = self.polytope.vertices.tolist()
            d["s"] = self.s
            return d
        d["center"] = self.center.tolist()
        key = "sigma" if self.family in (Family.LOGGAUSS, Family.LOGTENT) else "radius"
        d[key] = self.scale
        if self.family in (Family.BALL, Family.CAP, Family.NEGCAP):
            d["s"] = self.s
        if self.family in (Family.NEGCAP, Family.LOGGAUSS, Family.LOGTENT):
            d["truncation"] = self.truncation
        if self.family is not Family.LOGGAUSS:
            d["norm"] = "inf" if self.norm == math.inf else self.norm
        return d


def _points(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    return x


def evaluate(f: SConcaveFn, x) -> np.ndarray:
    """Evaluate ``f`` at one or many points; zero off the support."""
    raw = np.asarray(x, dtype=float)
    pts = _points(raw, f.n)
    out_shape = pts.shape[:-1]
    flat = pts.reshape(-1, f.n)
    if f.family is Family.INDICATOR:
        P = f.polytope
        if f.n == 1:
            lo, hi = P.vertices[0, 0], P.vertices[-1, 0]
            inside = (flat[:, 0] >= lo) & (flat[:, 0] <= hi)
        else:
            v = P.vertices
            edge = np.roll(v, -1, axis=0) - v
            rel = flat[None, :, :] - v[:, None, :]
            cross = edge[:, None, 0] * rel[..., 1] - edge[:, None, 1] * rel[..., 0]
            inside = np.all(cross >= -1e-12, axis=0)
        vals = np.where(inside, f.height, 0.0)
    else:
        t = _norm(flat - f.center, f.norm) / f.scale
        inside = t <= f._t_max
        vals = np.where(inside, f.height * f._phi(np.where(inside, t, 0.0)), 0.0)
    vals = vals.reshape(out_shape)
    return vals[()] if vals.ndim == 0 else vals


def _radial_moment(f: SConcaveFn) -> float:
    """``int_0^T t^(n-1) phi(t) dt`` in closed form."""
    n, T = f.n, f._t_max
    fam = f.family
    if fam is Family.BALL:
        return 1.0 / n
    if fam is Family.CAP:
        return float(special.beta(n, 1.0 / f.s + 1.0))
    if fam is Family.LOGGAUSS:
        return 0.5 * float(special.gamma(n / 2.0) * special.gammainc(n / 2.0, T * T))
    if fam is Family.LOGTENT:
        return float(special.gamma(n) * special.gammainc(n, T))
    # negcap: expand t^(n-1) = (w - 1)^(n-1) with w = 1 + t
    p = 1.0 / f.s
    total = 0.0
    for k in range(n):
        coef = math.comb(n - 1, k) * (-1.0) ** (n - 1 - k)
        q = k + p
        if abs(q + 1.0) < 1e-14:
            total += coef * math.log1p(T)
        else:
            total += coef * ((1.0 + T) ** (q + 1.0) - 1.0) / (q + 1.0)
    return total


def integral_closed_form(f: SConcaveFn) -> float:
    """Exact integral of ``f`` over R^n."""
    if f.family is Family.INDICATOR:
        return f.height * measure(f.polytope)
    n = f.n
    return f.height * f.scale**n * n * _ball_area(n, f.norm) * _radial_moment(f)


def level_set_measure(f: SConcaveFn, t: float) -> float:
    """Lebesgue measure of ``{f > t}`` for ``t > 0``."""
    if t >= f.height:
        return 0.0
    if f.family is Family.INDICATOR:
        return measure(f.polytope)
    radius = min(f._phi_inv(t / f.height), f._t_max) * f.scale
    return _ball_area(f.n, f.norm) * radius**f.n


def rearrange(f: SConcaveFn) -> SConcaveFn:
    """Symmetric decreasing rearrangement ``f*``.

    Level sets become centered Euclidean balls of equal measure, so each
    family maps to itself (indicators of planar polygons become discs).
    """
    n = f.n
    if f.family is Family.INDICATOR:
        vol = measure(f.polytope)
        if n == 1:
            return SConcaveFn.interval(-vol / 2, vol / 2, height=f.height, s=f.s)
        return SConcaveFn.ball(np.zeros(2), math.sqrt(vol / math.pi), f.height, 2.0, s=f.s)
    factor = 1.0 if n == 1 else math.sqrt(_ball_area(n, f.norm) / math.pi)
    return replace(
        f,
        center=np.zeros(n),
        scale=f.scale * factor,
        truncation=f.truncation * factor,
        norm=2.0,
    )


# ---------------------------------------------------------------------------
# grid functions


@dataclass(frozen=True, eq=False)
class GridFn:
    """Non-negative values on the uniform grid ``origin + spacing * index``."""

    origin: np.ndarray
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float).reshape(-1)
        v = np.asarray(self.values, dtype=float)
        if v.ndim != len(o):
            raise ValueError("values rank must match origin length")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("grid values must be finite and non-negative")
        o.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.origin)

    def axes(self) -> list[np.ndarray]:
        return [self.origin[a] + self.spacing * np.arange(m) for a, m in enumerate(self.values.shape)]

    def points(self) -> np.ndarray:
        """All grid points, shape ``values.shape + (n,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def integral(self) -> float:
        return float(self.values.sum() * self.spacing**self.n)

    @classmethod
    def sample(cls, f, spacing: float, box=None) -> GridFn:
        """Tabulate a callable (or :class:`SConcaveFn`) on a grid covering ``box``."""
        if box is None:
            box = f.support_box
        lo = np.asarray(box[0], dtype=float).reshape(-1)
        hi = np.asarray(box[1], dtype=float).reshape(-1)
        counts = [int(math.floor((h - l) / spacing + 1e-9)) + 1 for l, h in zip(lo, hi)]
        axes = [l + spacing * np.arange(m) for l, m in zip(lo, counts)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        vals = np.asarray(f(pts if len(lo) > 1 else pts[..., 0]), dtype=float).reshape(counts)
        return cls(lo, spacing, vals)


def _axis_of(theta, n: int) -> int:
    if isinstance(theta, (int, np.integer)):
        if not 0 <= theta < n:
            raise ValueError(f"axis {theta} out of range for dimension {n}")
        return int(theta)
    v = np.asarray(theta, dtype=float).reshape(-1)
    if len(v) != n:
        raise ValueError("direction has the wrong dimension")
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if len(nz) != 1 or abs(abs(v[nz[0]]) - 1.0) > 1e-12:
        raise ValueError("only coordinate-axis directions are supported")
    return int(nz[0])


def steiner_symmetral(f: GridFn, theta) -> GridFn:
    """Rearrange ``f`` along every grid line parallel to the axis ``theta``.

    Each fiber is replaced by its discrete symmetric decreasing
    rearrangement about zero: values are sorted in decreasing order and
    dealt onto grid slots by increasing distance from the origin (left
    slot first on ties). The output axis is re-centered so it is symmetric
    about zero; other axes are unchanged.
    """
    axis = _axis_of(theta, f.n)
    vals = np.moveaxis(f.values, axis, -1)
    m = vals.shape[-1]
    offsets = np.arange(m) - (m - 1) / 2.0
    slots = np.lexsort((offsets, np.abs(offsets)))
    ordered = -np.sort(-vals, axis=-1)
    out = np.empty_like(vals)
    out[..., slots] = ordered
    origin = f.origin.copy()
    origin[axis] = -(m - 1) / 2.0 * f.spacing
    return GridFn(origin, f.spacing, np.moveaxis(out, -1, axis))


def sup_convolution_grid(f: GridFn, g: GridFn, p: SParam) -> GridFn:
    """Exhaustive-search ``(f *_{lam,s} g)`` over all pairs of grid points.

    Every pair ``(x1, x2)`` of grid points contributes ``M(f(x1), g(x2))``
    to the output cell nearest to ``lam x1 + (1 - lam) x2``; the output
    grid has the input spacing.
    """
    if f.n != g.n or not math.isclose(f.spacing, g.spacing, rel_tol=1e-12):
        raise ValueError("grids must share dimension and spacing")
    lam = p.lam
    d = f.spacing
    origin = lam * f.origin + (1.0 - lam) * g.origin
    shape = tuple(
        int(math.floor(lam * (a - 1) + (1.0 - lam) * (b - 1) + 0.5)) + 1
        for a, b in zip(f.values.shape, g.values.shape)
    )
    fi = np.argwhere(f.values > 0)
    gi = np.argwhere(g.values > 0)
    out = np.zeros(shape)
    if len(fi) and len(gi):
        fv = f.values[tuple(fi.T)]
        gv = g.values[tuple(gi.T)]
        vals = p.mean(fv[:, None], gv[None, :])
        k = np.floor(lam * fi[:, None, :] + (1.0 - lam) * gi[None, :, :] + 0.5).astype(int)
        flat = np.ravel_multi_index(tuple(np.moveaxis(k, -1, 0)), shape)
        acc = np.zeros(out.size)
        np.maximum.at(acc, flat.reshape(-1), vals.reshape(-1))
        out = acc.reshape(shape)
    return GridFn(origin, d, out)
