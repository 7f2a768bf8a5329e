"""Random s-concave approximants built from uniform samples under a graph.

The sampler draws ``(X_i, Z_i)`` uniformly on ``{(x, z) : 0 <= z <= f(x)}``
by rejection from ``support_box x [0, max f]``. Every draw comes from a
counter-based Philox stream keyed by ``(seed, *stream)``, so a trial's
sample does not depend on which worker ran it, and a longer sample from
the same stream extends a shorter one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convex_kernel import LiftedBody
from .lift import lift_points, nu_measure, unlift_eval
from .smeans import SConcaveFn

__all__ = [
    "rng_for",
    "SampleCloud",
    "RandomApprox",
    "sample_under_graph",
    "build_approx",
    "integral_approx",
]


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for the stream ``(seed, *stream)``."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class SampleCloud:
    points: np.ndarray
    values: np.ndarray
    source: str = ""
    seed: int | None = None
    stream: tuple = ()
    n_proposed: int = 0
    n_accepted: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        p = np.asarray(self.points, dtype=float).reshape(len(v), -1)
        p.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)

    def head(self, N: int) -> SampleCloud:
        """The first ``N`` points (a nested sub-sample)."""
        return SampleCloud(self.points[:N], self.values[:N], self.source, self.seed, self.stream)


def sample_under_graph(f: SConcaveFn, N: int, seed: int, stream=()) -> SampleCloud:
    """``N`` i.i.d. uniform points under the graph of ``f``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    top = f.max_value
    lo, hi = (np.asarray(b, dtype=float) for b in f.support_box)
    if not top > 0 or np.any(hi <= lo):
        raise ValueError("the region under the graph has zero measure")
    stream = tuple(stream)
    rng = rng_for(seed, *stream)
    n = f.n
    xs, zs = [], []
    have = proposed = 0
    rate = 0.5
    while have < N:
        batch = max(16, int(math.ceil(1.2 * (N - have) / rate)))
        u = rng.random((batch, n + 1))
        x = lo + (hi - lo) * u[:, :n]
        z = top * u[:, n]
        ok = (z > 0) & (z <= f(x if n > 1 else x[:, 0]))
        proposed += batch
        xs.append(x[ok])
        zs.append(z[ok])
        have += int(ok.sum())
        rate = max(have / proposed, 1e-3)
    pts = np.vstack(xs)[:N]
    vals = np.concatenate(zs)[:N]
    return SampleCloud(pts, vals, f.family.value, seed, stream, proposed, have)


@dataclass(frozen=True, eq=False)
class RandomApprox:
    """The random function ``[f]_N``: the least s-concave function with
    ``[f]_N(X_i) >= Z_i``. For ``s < 0`` its lifted body is an epigraph."""

    s: float
    cloud: SampleCloud
    body: LiftedBody

    def __call__(self, x) -> np.ndarray:
        return unlift_eval(self.body, self.s, x)

    def integral(self) -> float:
        return nu_measure(self.body, self.s)


def build_approx(cloud: SampleCloud, s: float) -> RandomApprox:
    return RandomApprox(s, cloud, lift_points(cloud.points, cloud.values, s))


def integral_approx(a: RandomApprox) -> float:
    return a.integral()
