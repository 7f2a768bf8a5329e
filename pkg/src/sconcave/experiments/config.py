"""JSON experiment configuration.

A config is one JSON object. Recognised keys::

    experiment   "theorem1" | "bbl" | "converge" | "shadow" | "brunn"
    f, g         function specs, e.g. {"family": "cap", "center": [5], "radius": 1, "s": 1};
                 "bbl" without f runs its built-in fixture set
    s, lambda    concavity index and mixing weight
    N, M         sample sizes (N may be a list for "converge")
    trials       Monte Carlo repetitions
    alpha_grid   {"count": 20, "min": ..., "max": ...}
    seed         master seed (unsigned 64-bit)
    out          CSV output path
    spacing      grid spacing for the sup-convolution oracle ("bbl")
    lps          parameter system for "shadow":
                 {"s", "points", "speeds", "values", "theta", "t_range", "grid"}
    polytope     vertex list for "brunn"
    theta, grid  axis and grid size for "brunn"

Unknown keys are rejected at every level.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..convex_kernel import hull
from ..shadow import LpsSpec
from ..smeans import SConcaveFn

__all__ = ["ConfigError", "AlphaGrid", "ExperimentConfig", "function_from_spec", "load_config", "parse_config"]

EXPERIMENTS = ("theorem1", "bbl", "converge", "shadow", "brunn")

_TOP_KEYS = {
    "experiment", "f", "g", "s", "lambda", "N", "M", "trials", "alpha_grid", "seed", "out",
    "spacing", "lps", "polytope", "theta", "grid",
}

_FAMILY_KEYS = {
    "indicator": {"vertices", "interval", "height", "s"},
    "ball": {"center", "radius", "height", "norm", "s"},
    "cap": {"center", "radius", "height", "s", "norm"},
    "negcap": {"center", "radius", "height", "s", "truncation", "norm"},
    "loggauss": {"center", "sigma", "height", "truncation"},
    "logtent": {"center", "sigma", "height", "truncation", "norm"},
}


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


def _reject_unknown(d: dict, allowed: set, where: str):
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(extra)}")


def _norm_value(v):
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity", "max"):
            return math.inf
        raise ConfigError(f"bad norm {v!r}")
    return float(v)


def function_from_spec(spec: dict) -> SConcaveFn:
    """Build an :class:`SConcaveFn` from its JSON description."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("a function spec must be an object with a 'family' key")
    fam = spec["family"]
    if fam not in _FAMILY_KEYS:
        raise ConfigError(f"unknown family {fam!r}; choose from {sorted(_FAMILY_KEYS)}")
    body = {k: v for k, v in spec.items() if k != "family"}
    _reject_unknown(body, _FAMILY_KEYS[fam], f"function spec '{fam}'")
    kw = dict(body)
    if "norm" in kw:
        kw["norm"] = _norm_value(kw["norm"])
    try:
        if fam == "indicator":
            if "interval" in kw:
                a, b = kw.pop("interval")
                return SConcaveFn.interval(float(a), float(b), **kw)
            return SConcaveFn.indicator(np.asarray(kw.pop("vertices"), float), **kw)
        if fam == "ball":
            return SConcaveFn.ball(**kw)
        if fam == "cap":
            return SConcaveFn.cap(**kw)
        if fam == "negcap":
            return SConcaveFn.negcap(**kw)
        if fam == "loggauss":
            return SConcaveFn.log_gauss(**kw)
        return SConcaveFn.log_tent(**kw)
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"invalid '{fam}' spec: {exc}") from exc


@dataclass(frozen=True)
class AlphaGrid:
    count: int = 20
    min: float | None = None
    max: float | None = None

    def values(self, default_scale: float) -> np.ndarray:
        lo = 0.1 * default_scale if self.min is None else self.min
        hi = 1.1 * default_scale if self.max is None else self.max
        grid = np.linspace(lo, hi, self.count)
        if self.count >= 2 and not np.all(np.diff(grid) > 0):
            raise ConfigError("alpha grid must be strictly increasing")
        return grid


@dataclass
class ExperimentConfig:
    experiment: str
    f: SConcaveFn | None = None
    g: SConcaveFn | None = None
    s: float | None = None
    lam: float = 0.5
    N: int | list = 4
    M: int = 4
    trials: int = 1000
    alpha_grid: AlphaGrid = field(default_factory=AlphaGrid)
    seed: int = 0
    out: str | None = None
    spacing: float | None = None
    lps: LpsSpec | None = None
    polytope: object = None
    theta: int = 0
    grid: int = 41

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0.0 < self.lam < 1.0:
            raise ConfigError("lambda must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.experiment in ("theorem1", "converge") and self.f is None:
            raise ConfigError(f"{self.experiment} needs an 'f' spec")
        if self.experiment == "bbl" and self.f is None and self.g is not None:
            raise ConfigError("bbl with a 'g' spec also needs 'f'")
        if self.experiment in ("theorem1", "bbl") and self.g is None:
            self.g = self.f
        if self.s is None and self.f is not None:
            self.s = self.f.s
        Ns = self.N if isinstance(self.N, list) else [self.N]
        if any(int(k) < 1 for k in Ns) or self.M < 1:
            raise ConfigError("sample sizes must be >= 1")
        if self.f is not None and self.experiment == "theorem1":
            n = self.f.n
            if min(Ns) < n + 2 or self.M < n + 2:
                raise ConfigError(f"theorem1 needs N, M >= n + 2 = {n + 2}")

    @property
    def n(self) -> int:
        return self.f.n if self.f is not None else 1


def _lps_from(d: dict) -> LpsSpec:
    allowed = {"s", "points", "speeds", "values", "theta", "t_range", "grid"}
    _reject_unknown(d, allowed, "lps")
    try:
        return LpsSpec(
            s=float(d["s"]),
            points=np.asarray(d["points"], float),
            speeds=np.asarray(d["speeds"], float),
            values=np.asarray(d["values"], float),
            theta=int(d.get("theta", 0)),
            t_range=tuple(d.get("t_range", (0.0, 1.0))),
            grid=int(d.get("grid", 21)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid lps block: {exc}") from exc


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a decoded JSON object into an :class:`ExperimentConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "config")
    if "experiment" not in raw:
        raise ConfigError("config needs an 'experiment' key")
    kw: dict = {"experiment": raw["experiment"]}
    if "f" in raw:
        kw["f"] = function_from_spec(raw["f"])
    if "g" in raw:
        kw["g"] = function_from_spec(raw["g"])
    if "alpha_grid" in raw:
        ag = raw["alpha_grid"]
        if not isinstance(ag, dict):
            raise ConfigError("alpha_grid must be an object")
        _reject_unknown(ag, {"count", "min", "max"}, "alpha_grid")
        kw["alpha_grid"] = AlphaGrid(int(ag.get("count", 20)), ag.get("min"), ag.get("max"))
    if "lps" in raw:
        kw["lps"] = _lps_from(raw["lps"])
    if "polytope" in raw:
        try:
            kw["polytope"] = hull(np.asarray(raw["polytope"], float))
        except ValueError as exc:
            raise ConfigError(f"invalid polytope: {exc}") from exc
    simple = {"s": float, "lambda": float, "M": int, "trials": int, "seed": int,
              "out": str, "spacing": float, "theta": int, "grid": int}
    try:
        for key, cast in simple.items():
            if key in raw:
                kw["lam" if key == "lambda" else key] = cast(raw[key])
        if "N" in raw:
            kw["N"] = [int(k) for k in raw["N"]] if isinstance(raw["N"], list) else int(raw["N"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scalar value: {exc}") from exc
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(raw)
