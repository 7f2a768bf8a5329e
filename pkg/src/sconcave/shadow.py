"""Linear parameter systems, shadow systems and convexity diagnostics.

Everything here is finitely generated. Convexity verdicts come from
second differences on uniform grids, normalized by the largest magnitude
of the sampled values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .convex_kernel import BodyKind, CoefficientBody, LiftedBody, VPolytope
from .lift import LiftSpec, m_combination, nu_measure
from .random_approx import RandomApprox, SampleCloud, build_approx, integral_approx, rng_for
from .smeans import _axis_of

__all__ = [
    "CONVEXITY_TOL",
    "LpsSpec",
    "ShadowEpiSpec",
    "ConvexityReport",
    "SteinerReport",
    "lps_at",
    "scan_convexity",
    "project_shadow",
    "steiner_convexity_probe",
    "brunn_profile",
]

CONVEXITY_TOL = 1e-7


def _unit(theta, n: int) -> np.ndarray:
    e = np.zeros(n)
    e[_axis_of(theta, n)] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class LpsSpec:
    """Points ``(x_i + speeds_i t theta, values_i)`` for ``t`` in ``t_range``."""

    s: float
    points: np.ndarray
    speeds: np.ndarray
    values: np.ndarray
    theta: int | tuple = 0
    t_range: tuple[float, float] = (0.0, 1.0)
    grid: int = 21

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if len(v) == 0:
            raise ValueError("a parameter system needs at least one point")
        p = np.asarray(self.points, dtype=float).reshape(len(v), -1)
        sp = np.asarray(self.speeds, dtype=float).reshape(-1)
        if len(sp) != len(v):
            raise ValueError("one speed per point")
        a, b = self.t_range
        if not a < b:
            raise ValueError("t_range must satisfy a < b")
        if np.any(v <= 0):
            raise ValueError("values must be positive")
        for name, arr in (("points", p), ("speeds", sp), ("values", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t_range", (float(a), float(b)))

    @property
    def direction(self) -> np.ndarray:
        return _unit(self.theta, self.points.shape[1])

    def positions(self, t: float) -> np.ndarray:
        return self.points + t * self.speeds[:, None] * self.direction


@dataclass(frozen=True, eq=False)
class ShadowEpiSpec:
    """Generators ``(x_i, z_i, y_i)`` of a body in base x height x speed space."""

    points: np.ndarray
    heights: np.ndarray
    speeds: np.ndarray
    theta: int | tuple = 0
    kind: BodyKind = BodyKind.EPIGRAPH

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=float).reshape(-1)
        p = np.asarray(self.points, dtype=float).reshape(len(h), -1)
        y = np.asarray(self.speeds, dtype=float).reshape(-1)
        if len(h) == 0 or len(y) != len(h):
            raise ValueError("need matching, non-empty generator arrays")
        object.__setattr__(self, "kind", BodyKind(self.kind))
        if self.kind is BodyKind.HYPOGRAPH and np.any(h < 0):
            raise ValueError("hypograph heights must be >= 0")
        for name, arr in (("points", p), ("heights", h), ("speeds", y)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass
class ConvexityReport:
    t: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray
    tol: float = CONVEXITY_TOL
    concave: bool = False

    @property
    def min_second_difference(self) -> float:
        return float(self.second_differences.min()) if len(self.second_differences) else 0.0

    @property
    def normalized_min(self) -> float:
        """Minimum second difference divided by ``max(1, max |value|)``."""
        return self.min_second_difference / max(1.0, float(np.max(np.abs(self.values))))

    @property
    def ok(self) -> bool:
        return self.normalized_min >= -self.tol

    def rows(self):
        """CSV rows ``(t, value, second_difference)``; endpoints have none."""
        sd = np.full(len(self.t), np.nan)
        sd[1:-1] = self.second_differences
        return list(zip(self.t.tolist(), self.values.tolist(), sd.tolist()))


def lps_at(spec: LpsSpec, t: float) -> RandomApprox:
    """The member ``f_{t,s}`` of the parameter system at time ``t``."""
    a, b = spec.t_range
    if not a - 1e-12 <= t <= b + 1e-12:
        raise ValueError(f"t = {t} outside [{a}, {b}]")
    cloud = SampleCloud(spec.positions(t), spec.values, source="lps")
    return build_approx(cloud, spec.s)


def _second_differences(v: np.ndarray) -> np.ndarray:
    return v[:-2] - 2.0 * v[1:-1] + v[2:]


def scan_convexity(spec: LpsSpec) -> ConvexityReport:
    """Integrals of ``f_{t,s}`` on a uniform ``t`` grid and their second differences."""
    if spec.grid < 3:
        raise ValueError("grid needs at least 3 points")
    t = np.linspace(*spec.t_range, spec.grid)
    values = np.array([integral_approx(lps_at(spec, tk)) for tk in t])
    return ConvexityReport(t, values, _second_differences(values))


def project_shadow(spec: ShadowEpiSpec, t: float) -> LiftedBody:
    """Image of the generators under ``(x, z, y) -> (x + t y theta, z)``."""
    n = spec.points.shape[1]
    moved = spec.points + t * spec.speeds[:, None] * _unit(spec.theta, n)
    return LiftedBody.build(moved, spec.heights, spec.kind)


@dataclass
class SteinerReport:
    evenness_gap: float
    min_midpoint_margin: float
    n_checks: int
    evenness_tol: float = 1e-9
    convexity_tol: float = CONVEXITY_TOL
    values: list = field(default_factory=list, repr=False)

    @property
    def even(self) -> bool:
        return self.evenness_gap <= self.evenness_tol

    @property
    def convex(self) -> bool:
        return self.min_midpoint_margin >= -self.convexity_tol

    @property
    def ok(self) -> bool:
        return self.even and self.convex


def steiner_convexity_probe(
    rho,
    y,
    C: CoefficientBody,
    kind,
    s: float | None = None,
    theta=0,
    n_lines: int = 8,
    seed: int = 0,
    spread: float = 1.0,
) -> SteinerReport:
    """Check evenness and midpoint convexity of the functional
    ``F(t_1..t_N) = nu(C-combination of rays/segments at y_i + t_i theta)``.

    ``s`` selects the lifted measure (``s = 1`` for hypographs gives plain
    area or volume); by default 1 for segments and 0 for rays. The ``y_i``
    must lie in the hyperplane orthogonal to ``theta``. Both gaps are
    normalized by ``max(1, |F|)``.
    """
    kind = BodyKind(kind)
    rho = np.asarray(rho, dtype=float).reshape(-1)
    N = len(rho)
    Y = np.asarray(y, dtype=float).reshape(N, -1)
    n = Y.shape[1]
    e = _unit(theta, n)
    if np.any(np.abs(Y @ e) > 1e-12):
        raise ValueError("the y_i must lie in the hyperplane orthogonal to theta")
    if s is None:
        s = 1.0 if kind is BodyKind.HYPOGRAPH else 0.0
    if LiftSpec(s).kind is not kind:
        raise ValueError(f"s = {s} does not match a {kind.value} functional")

    def F(t: np.ndarray) -> float:
        body = m_combination(Y + t[:, None] * e, rho, kind, C)
        return nu_measure(body, s)

    rng = rng_for(seed, 7)
    gap = 0.0
    margin = np.inf
    values = []
    taus = np.linspace(-1.0, 1.0, 5)
    for _ in range(n_lines):
        t0 = rng.uniform(-spread, spread, N)
        d = rng.uniform(-spread, spread, N)
        fp, fm = F(t0), F(-t0)
        gap = max(gap, abs(fp - fm) / max(1.0, abs(fp)))
        vals = np.array([F(t0 + tau * d) for tau in taus])
        values.append(vals)
        scale = max(1.0, float(np.max(np.abs(vals))))
        # midpoint convexity on nested triples along the line
        mids = [(0, 2, 4), (0, 1, 2), (2, 3, 4), (1, 2, 3)]
        for i, j, k in mids:
            margin = min(margin, (0.5 * (vals[i] + vals[k]) - vals[j]) / scale)
    return SteinerReport(gap, float(margin), n_lines, values=values)


def _chord_lengths(K: VPolytope, axis: int, t: np.ndarray) -> np.ndarray:
    v = K.vertices
    w = np.roll(v, -1, axis=0)
    other = 1 - axis
    out = np.zeros(len(t))
    for k, tk in enumerate(t):
        hits = []
        for a, b in zip(v, w):
            lo, hi = sorted((a[axis], b[axis]))
            if lo - 1e-12 <= tk <= hi + 1e-12:
                if hi - lo < 1e-15:
                    hits.extend([a[other], b[other]])
                else:
                    tau = (tk - a[axis]) / (b[axis] - a[axis])
                    hits.append(a[other] + tau * (b[other] - a[other]))
        out[k] = max(hits) - min(hits) if hits else 0.0
    return out


def brunn_profile(K: VPolytope, theta=0, grid: int = 41) -> ConvexityReport:
    """Chord lengths of a polygon along ``theta``; checks their concavity.

    ``second_differences`` holds those of ``-A``, so the profile is concave
    when the report is ``ok``.
    """
    if K.dim != 2 or len(K) < 3:
        raise ValueError("brunn_profile takes a full-dimensional polygon")
    axis = _axis_of(theta, 2)
    lo, hi = K.vertices[:, axis].min(), K.vertices[:, axis].max()
    t = np.linspace(lo, hi, grid)
    A = _chord_lengths(K, axis, t)
    return ConvexityReport(t, A, _second_differences(-A), tol=1e-9, concave=True)
