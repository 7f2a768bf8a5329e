"""Experiment drivers behind the CLI.

Monte Carlo trials are independent: trial ``i`` of pipeline ``tag`` draws
from the Philox stream ``(seed, tag, i, which)``, and results are
aggregated in trial order, so the output does not depend on the number
of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..convex_kernel import hull
from ..lift import QuadratureError, _adaptive, combine_lifted, exact_body, lift_points, nu_measure, unlift_eval
from ..random_approx import sample_under_graph
from ..shadow import ConvexityReport, LpsSpec, brunn_profile, scan_convexity
from ..smeans import Family, GridFn, SConcaveFn, SParam, integral_closed_form, power_mean, rearrange, sup_convolution_grid
from .config import ConfigError, ExperimentConfig

__all__ = [
    "ORIGINAL",
    "REARRANGED",
    "SurvivalCurve",
    "Theorem1Result",
    "BBLRow",
    "ConvergenceResult",
    "run_theorem1",
    "bbl_check",
    "bbl_fixtures",
    "run_bbl",
    "run_convergence",
    "run_shadow_scan",
    "run_brunn",
    "default_lps",
]

ORIGINAL, REARRANGED = 0, 1
_CONVERGE_TAG = 2


@dataclass
class SurvivalCurve:
    """Empirical ``P(X > alpha)`` with binomial standard errors."""

    alphas: np.ndarray
    p: np.ndarray
    se: np.ndarray
    trials: int

    @classmethod
    def from_values(cls, values, alphas) -> SurvivalCurve:
        v = np.sort(np.asarray(values, dtype=float))
        T = len(v)
        alphas = np.asarray(alphas, dtype=float)
        if T == 0:
            z = np.zeros(len(alphas))
            return cls(alphas, z, z.copy(), 0)
        p = (T - np.searchsorted(v, alphas, side="right")) / T
        return cls(alphas, p, np.sqrt(p * (1.0 - p) / T), T)


@dataclass
class Theorem1Result:
    original: SurvivalCurve
    rearranged: SurvivalCurve
    values_original: np.ndarray = field(repr=False)
    values_rearranged: np.ndarray = field(repr=False)
    flagged: tuple[int, int] = (0, 0)

    @property
    def alphas(self) -> np.ndarray:
        return self.original.alphas

    @property
    def band(self) -> np.ndarray:
        return self.original.se + self.rearranged.se

    @property
    def verdicts(self) -> np.ndarray:
        """Dominance holds at alpha if ``p_orig >= p_rearr - 2 (se_orig + se_rearr)``."""
        return self.original.p >= self.rearranged.p - 2.0 * self.band

    @property
    def passed(self) -> bool:
        return bool(np.all(self.verdicts))

    def equal_within(self, k: float = 3.0) -> bool:
        """Whether ``|p_orig - p_rearr| <= k (se_orig + se_rearr)`` at every alpha."""
        return bool(np.all(np.abs(self.original.p - self.rearranged.p) <= k * self.band))

    header = ("alpha", "p_orig", "se_orig", "p_rearr", "se_rearr", "verdict")

    def rows(self):
        o, r = self.original, self.rearranged
        for k in range(len(self.alphas)):
            yield (o.alphas[k], o.p[k], o.se[k], r.p[k], r.se[k], "PASS" if self.verdicts[k] else "FAIL")


def _trial(f, g, s, lam, N, M, seed, tag, index) -> float:
    cf = sample_under_graph(f, N, seed, (tag, index, 0))
    cg = sample_under_graph(g, M, seed, (tag, index, 1))
    body = combine_lifted(lift_points(cf.points, cf.values, s), lift_points(cg.points, cg.values, s), lam)
    try:
        value = nu_measure(body, s)
    except QuadratureError:
        return math.nan
    return value if math.isfinite(value) and value >= 0 else math.nan


def _trial_chunk(args, indices):
    return [_trial(*args, index) for index in indices]


def _run_trials(args, trials: int, threads: int) -> np.ndarray:
    idx = list(range(trials))
    if threads <= 1:
        return np.array(_trial_chunk(args, idx))
    size = max(1, math.ceil(trials / (4 * threads)))
    chunks = [idx[i : i + size] for i in range(0, trials, size)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(_trial_chunk, [args] * len(chunks), chunks))
    return np.array([v for part in parts for v in part])


def _check_family_s(f: SConcaveFn, s: float):
    if f.family in (Family.INDICATOR, Family.BALL):
        return
    if s > f.s:
        raise ConfigError(f"{f.family.value} with s = {f.s} is not {s}-concave")


def run_theorem1(cfg: ExperimentConfig, threads: int = 1) -> Theorem1Result:
    """Survival curves of the integrated sup-convolution for ``(f, g)`` and ``(f*, g*)``."""
    f, g, s, lam = cfg.f, cfg.g, cfg.s, cfg.lam
    SParam(s, lam, f.n)
    _check_family_s(f, s)
    _check_family_s(g, s)
    N = cfg.N if isinstance(cfg.N, int) else int(cfg.N[0])
    alphas = cfg.alpha_grid.values(max(integral_closed_form(f), integral_closed_form(g)))
    fs, gs = rearrange(f), rearrange(g)
    orig = _run_trials((f, g, s, lam, N, cfg.M, cfg.seed, ORIGINAL), cfg.trials, threads)
    rear = _run_trials((fs, gs, s, lam, N, cfg.M, cfg.seed, REARRANGED), cfg.trials, threads)
    flagged = (int(np.isnan(orig).sum()), int(np.isnan(rear).sum()))
    return Theorem1Result(
        SurvivalCurve.from_values(orig[~np.isnan(orig)], alphas),
        SurvivalCurve.from_values(rear[~np.isnan(rear)], alphas),
        orig,
        rear,
        flagged,
    )


@dataclass
class BBLRow:
    name: str
    lhs: float
    rhs: float
    lhs_rearranged: float
    method: str
    tol: float

    header = ("name", "lhs", "rhs", "margin_bbl", "lhs_rearranged", "margin_rearranged", "method", "verdict")

    @property
    def margin_bbl(self) -> float:
        return self.lhs - self.rhs

    @property
    def margin_rearranged(self) -> float:
        return self.lhs - self.lhs_rearranged

    @property
    def passed(self) -> bool:
        return self.margin_bbl >= -self.tol and self.margin_rearranged >= -self.tol

    def row(self):
        return (self.name, self.lhs, self.rhs, self.margin_bbl, self.lhs_rearranged,
                self.margin_rearranged, self.method, "PASS" if self.passed else "FAIL")


def _radial_pair(f: SConcaveFn, g: SConcaveFn) -> bool:
    return (
        f.n == g.n == 2
        and Family.INDICATOR not in (f.family, g.family)
        and f.norm == g.norm == 2.0
    )


def _radial_sup_conv_integral(f: SConcaveFn, g: SConcaveFn, p: SParam) -> float:
    """Sup-convolution integral for two Euclidean radial functions.

    Translating ``f`` or ``g`` only translates ``f * g``, so both are taken
    centered at 0. For nonincreasing radial profiles the sup over decompositions of ``v``
    is attained with both points on the ray through ``v`` (shrinking onto
    that ray only raises the values), so ``f * g`` is radial with profile
    equal to the 1D sup-convolution of the profiles. That profile is exact
    in lifted coordinates; the remaining ``2 pi r dr`` integral is done per
    affine piece.
    """
    prof = [exact_body(replace(h, center=np.zeros(1)), p.s) for h in (f, g)]
    body = combine_lifted(*prof, p.lam)
    knots = np.unique(np.concatenate([[0.0], body.points[:, 0][body.points[:, 0] > 0]]))
    fun = lambda r: 2.0 * np.pi * r * unlift_eval(body, p.s, r)
    peak = float(unlift_eval(body, p.s, 0.0))
    scale = np.pi * knots[-1] ** 2 * peak
    return float(sum(_adaptive(fun, a, b, scale, 1e-13) for a, b in zip(knots[:-1], knots[1:])))


def _sup_conv_integral(f: SConcaveFn, g: SConcaveFn, p: SParam, spacing: float | None):
    """Integral of the sup-convolution: exact lifted path when possible, else grid."""
    try:
        A, B = exact_body(f, p.s), exact_body(g, p.s)
    except ValueError:
        pass
    else:
        return nu_measure(combine_lifted(A, B, p.lam), p.s), "lifted", 1e-6
    if _radial_pair(f, g):
        try:
            return _radial_sup_conv_integral(f, g, p), "radial", 1e-6
        except ValueError:
            pass
    widths = [float(np.min(h - l)) for l, h in (f.support_box, g.support_box)]
    d = spacing if spacing is not None else min(widths) / (200 if f.n == 1 else 40)
    conv = sup_convolution_grid(GridFn.sample(f, d), GridFn.sample(g, d), p)
    val = conv.integral()
    tol = 4.0 * f.n * d * val / min(widths)
    return val, "grid", tol


def bbl_check(f: SConcaveFn, g: SConcaveFn, s: float, lam: float = 0.5, name: str = "",
              spacing: float | None = None) -> BBLRow:
    """Both sides of the integrated mean inequality, plus the rearranged sup-convolution."""
    p = SParam(s, lam, f.n)
    lhs, method, tol = _sup_conv_integral(f, g, p, spacing)
    lhs_r, method_r, tol_r = _sup_conv_integral(rearrange(f), rearrange(g), p, spacing)
    rhs = float(power_mean(integral_closed_form(f), integral_closed_form(g), p.bbl_exponent, lam))
    m = method if method == method_r else f"{method}/{method_r}"
    return BBLRow(name, float(lhs), rhs, float(lhs_r), m, max(tol, tol_r))


def bbl_fixtures() -> list[tuple[str, SConcaveFn, SConcaveFn, float]]:
    """Deterministic ``(name, f, g, s)`` cases checked by ``bbl`` without a config."""
    c = SConcaveFn.cap
    return [
        ("intervals_1_3", SConcaveFn.interval(0, 1), SConcaveFn.interval(0, 3), 1.0),
        ("caps_h1_h2", c([0], 1, 1, 1.0), c([0], 1, 2, 1.0), 1.0),
        ("equal_caps", c([2], 1, 1, 0.5), c([2], 1, 1, 0.5), 0.5),
        ("offcenter_caps_s2", c([3], 1, 1, 2.0), c([-1], 2, 0.5, 2.0), 2.0),
        ("logtents", SConcaveFn.log_tent([1], 0.5, 1, 2.0), SConcaveFn.log_tent([-2], 1, 2, 3.0), 0.0),
        ("negcaps", SConcaveFn.negcap([0], 1, 1, -0.25, 2.0), SConcaveFn.negcap([4], 0.5, 2, -0.25, 1.0), -0.25),
        ("intervals_s0", SConcaveFn.interval(-1, 2, s=0.0), SConcaveFn.interval(5, 5.5, s=0.0), 0.0),
        ("l1_caps_2d", c([1, 0], 1, 1, 1.0, norm=1), c([0, 2], 0.5, 2, 1.0, norm=1), 1.0),
        ("l1_cap_vs_disc_2d", c([1, 1], 1, 1, 0.5, norm=1), c([-2, 0], 0.8, 1.5, 0.5), 0.5),
        ("logtents_2d", SConcaveFn.log_tent([0, 0], 0.5, 1, 1.5, norm=math.inf),
         SConcaveFn.log_tent([2, 1], 1.0, 0.5, 2.0, norm=2), 0.0),
    ]


def run_bbl(cfg: ExperimentConfig | None = None) -> list[BBLRow]:
    if cfg is None or cfg.f is None:
        return [bbl_check(f, g, s, name=name) for name, f, g, s in bbl_fixtures()]
    _check_family_s(cfg.f, cfg.s)
    _check_family_s(cfg.g, cfg.s)
    return [bbl_check(cfg.f, cfg.g, cfg.s, cfg.lam, name="config", spacing=cfg.spacing)]


@dataclass
class ConvergenceResult:
    Ns: list[int]
    ratios: np.ndarray = field(repr=False)

    header = ("N", "median_ratio", "q25", "q75", "min_ratio", "max_ratio")

    @property
    def medians(self) -> np.ndarray:
        return np.median(self.ratios, axis=0)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.ratios <= 1.0 + 1e-9) and np.all(np.diff(self.medians) >= -1e-12))

    def rows(self):
        q25, q50, q75 = np.percentile(self.ratios, [25, 50, 75], axis=0)
        for k, N in enumerate(self.Ns):
            yield (N, q50[k], q25[k], q75[k], self.ratios[:, k].min(), self.ratios[:, k].max())


def run_convergence(cfg: ExperimentConfig) -> ConvergenceResult:
    """Ratios of the integral of ``[f]_N`` to that of ``f`` over nested samples."""
    f, s = cfg.f, cfg.s
    _check_family_s(f, s)
    Ns = sorted(cfg.N) if isinstance(cfg.N, list) else [4 * 2**k for k in range(7)]
    exact = integral_closed_form(f)
    ratios = np.empty((cfg.trials, len(Ns)))
    for k in range(cfg.trials):
        cloud = sample_under_graph(f, max(Ns), cfg.seed, (_CONVERGE_TAG, k))
        for j, N in enumerate(Ns):
            sub = cloud.head(N)
            ratios[k, j] = nu_measure(lift_points(sub.points, sub.values, s), s) / exact
    return ConvergenceResult(Ns, ratios)


def default_lps() -> LpsSpec:
    """Two unit-height points moving towards each other: widths ``|1 - 2t|``."""
    return LpsSpec(1.0, [[0.0], [1.0]], [1.0, -1.0], [1.0, 1.0], 0, (0.0, 0.5), 21)


def run_shadow_scan(cfg: ExperimentConfig | None = None) -> ConvexityReport:
    spec = cfg.lps if cfg is not None and cfg.lps is not None else default_lps()
    return scan_convexity(spec)


def run_brunn(cfg: ExperimentConfig | None = None) -> ConvexityReport:
    if cfg is not None and cfg.polytope is not None:
        K = cfg.polytope
    else:
        ang = np.pi / 3 * np.arange(6)
        K = hull(np.column_stack([np.cos(ang), np.sin(ang)]))
    theta = cfg.theta if cfg is not None else 0
    grid = cfg.grid if cfg is not None else 41
    return brunn_profile(K, theta, grid)
