"""Lifted (epigraph / hypograph) representation of s-concave functions.

A positive value ``z`` at base point ``x`` is lifted to the height
``rho(z)``:

* ``s > 0``: ``rho = z^s``, hypograph bodies (segments down to height 0);
* ``s = 0``: ``rho = -log z``, epigraph bodies (upward rays);
* ``s < 0``: ``rho = z^s``, epigraph bodies.

In these coordinates s-concavity is ordinary convexity, sup-convolution is
Minkowski combination of bodies, and the integral of the represented
function is the measure ``h(z) dx dz`` of the body. The integral is
computed in function-value coordinates ``u`` where the measure becomes
``du``, i.e. a layer-cake integral of slice measures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convex_kernel import (
    BodyKind,
    CoefficientBody,
    LiftedBody,
    measure,
    slice_measure,
)
from .smeans import Family, SConcaveFn

__all__ = [
    "QuadratureError",
    "WeightFn",
    "LiftSpec",
    "lift_points",
    "nu_measure",
    "combine_lifted",
    "m_combination",
    "unlift_eval",
    "exact_body",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach its tolerance."""


@dataclass(frozen=True)
class WeightFn:
    """Density ``h`` of the lifted measure against ``dx dz``."""

    s: float

    @property
    def case(self) -> str:
        return "zero" if self.s == 0 else ("neg" if self.s < 0 else "pos")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        s = self.s
        if s == 0:
            return np.exp(-z)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (abs(1.0 / s)) * z ** (1.0 / s - 1.0)
        return np.where(z > 0, val, 0.0)


@dataclass(frozen=True)
class LiftSpec:
    """Body kind and height map for a given ``s``."""

    s: float

    @property
    def kind(self) -> BodyKind:
        return BodyKind.HYPOGRAPH if self.s > 0 else BodyKind.EPIGRAPH

    def height_map(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0):
            raise ValueError("function values must be > 0 to be lifted")
        return -np.log(z) if self.s == 0 else z**self.s

    def value_of(self, rho):
        """Inverse of :meth:`height_map`: function value at lifted height ``rho``."""
        rho = np.asarray(rho, dtype=float)
        if self.s == 0:
            return np.exp(-rho)
        with np.errstate(divide="ignore"):
            return np.where(rho > 0, np.abs(rho) ** (1.0 / self.s), 0.0 if self.s > 0 else np.inf)


def lift_points(points, values, s: float) -> LiftedBody:
    """Lift the cloud ``{(x_i, z_i)}`` to a body with generators ``(x_i, rho(z_i))``."""
    spec = LiftSpec(s)
    values = np.asarray(values, dtype=float).reshape(-1)
    pts = np.asarray(points, dtype=float).reshape(len(values), -1)
    return LiftedBody.build(pts, spec.height_map(values), spec.kind)


def _check(B: LiftedBody, s: float) -> LiftSpec:
    spec = LiftSpec(s)
    if B.kind is not spec.kind:
        raise ValueError(f"s = {s} needs a {spec.kind.value} body, got {B.kind.value}")
    if s < 0 and np.any(B.heights <= 0):
        raise ValueError("for s < 0 all lifted heights must be positive")
    return spec


def _panel_poly(B: LiftedBody, r0: float, r1: float):
    """Slice measure on heights in [r0, r1] as a polynomial in the local variable.

    Between consecutive generator heights the slice moves affinely, so its
    measure is a polynomial in the height of degree ``base_dim``.
    """
    deg = B.base_dim
    k = np.arange(deg + 1)
    tau = np.cos(np.pi * (2 * k + 1) / (2 * (deg + 1)))
    mid, half = 0.5 * (r0 + r1), 0.5 * (r1 - r0)
    vals = slice_measure(B, mid + half * tau)
    coef = np.polynomial.polynomial.polyfit(tau, vals, deg)
    return coef, mid, half


def _gl(fun, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(_GL_W, fun(mid + half * _GL_X)))


def _adaptive(fun, a: float, b: float, scale: float, rtol: float, max_panels: int = 4000) -> float:
    """16-point Gauss-Legendre with bisection until halves agree with the whole."""
    total = 0.0
    stack = [(a, b, _gl(fun, a, b))]
    used = 0
    while stack:
        lo, hi, whole = stack.pop()
        m = 0.5 * (lo + hi)
        left, right = _gl(fun, lo, m), _gl(fun, m, hi)
        used += 1
        if abs(left + right - whole) <= rtol * max(scale, abs(whole)) or hi - lo <= 1e-15 * max(1.0, abs(hi)):
            total += left + right
        elif used > max_panels:
            raise QuadratureError(f"no convergence on [{a}, {b}] after {max_panels} bisections")
        else:
            stack.append((lo, m, left))
            stack.append((m, hi, right))
    return total


def nu_measure(B: LiftedBody, s: float, rtol: float = 1e-13) -> float:
    """The lifted measure of ``B``, equal to the integral of the represented function.

    Integrates ``|slice at rho(u)|`` over function values ``u`` in
    ``[0, u_max]`` with breakpoints at the generator values. Below the
    smallest generator value every slice is the whole base ``conv{x_i}``,
    so that panel is exact.
    """
    spec = _check(B, s)
    base_area = measure(B.base)
    if base_area <= 0:
        return 0.0
    rho_levels = np.unique(B.heights)
    u_levels = np.sort(spec.value_of(rho_levels))
    total = base_area * u_levels[0]
    scale = base_area * u_levels[-1]
    for u0, u1 in zip(u_levels[:-1], u_levels[1:]):
        if u1 <= u0:
            continue
        r0, r1 = sorted(float(r) for r in spec_height(spec, np.array([u0, u1])))
        coef, mid, half = _panel_poly(B, r0, r1)

        def integrand(u, coef=coef, mid=mid, half=half):
            tau = (spec_height(spec, u) - mid) / half
            return np.maximum(np.polynomial.polynomial.polyval(tau, coef), 0.0)

        total += _adaptive(integrand, float(u0), float(u1), scale, rtol)
    return float(total)


def spec_height(spec: LiftSpec, u):
    """Height map without the positivity check, for quadrature nodes."""
    u = np.asarray(u, dtype=float)
    return -np.log(u) if spec.s == 0 else u**spec.s


def combine_lifted(A: LiftedBody, B: LiftedBody, lam: float) -> LiftedBody:
    """``lam A + (1 - lam) B``; represents the sup-convolution of the two functions."""
    if A.kind is not B.kind or A.base_dim != B.base_dim:
        raise ValueError("bodies must share kind and base dimension")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    g = lam * A.generators[:, None, :] + (1.0 - lam) * B.generators[None, :, :]
    g = g.reshape(-1, A.base_dim + 1)
    return LiftedBody.build(g[:, :-1], g[:, -1], A.kind)


def m_combination(points, heights, kind, C: CoefficientBody) -> LiftedBody:
    """``C``-combination of rays (epigraph) or segments (hypograph) at ``(x_i, rho_i)``.

    Points of the combination are ``sum c_i (x_i, r_i)`` with ``c`` in ``C``
    and ``r_i >= rho_i`` (rays) or ``0 <= r_i <= rho_i`` (segments); since
    ``C`` is in the positive orthant, this is the body generated by the
    images ``C^T [x | rho]`` of the vertices of ``C``.
    """
    kind = BodyKind(kind)
    h = np.asarray(heights, dtype=float).reshape(-1)
    pts = np.asarray(points, dtype=float).reshape(len(h), -1)
    if C.N != len(h):
        raise ValueError(f"coefficient body lives in R^{C.N}, got {len(h)} generators")
    if kind is BodyKind.EPIGRAPH and np.any(C.vertices.sum(axis=1) <= 0):
        raise ValueError("epigraph combination needs coefficient vertices with positive mass")
    return LiftedBody.build(C.vertices @ pts, C.vertices @ h, kind)


def unlift_eval(B: LiftedBody, s: float, x) -> np.ndarray:
    """Value of the function represented by ``B``; zero off ``conv{x_i}``."""
    spec = _check(B, s)
    env = B.envelope(x)
    out = np.zeros(np.shape(env))
    ok = np.isfinite(env)
    out[ok] = spec.value_of(env[ok])
    return out[()] if out.ndim == 0 else out


def _norm_ball_vertices(n: int, norm: float) -> np.ndarray:
    if n == 1:
        return np.array([[-1.0], [1.0]])
    if norm == 1:
        return np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    if norm == math.inf:
        return np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
    raise ValueError("the Euclidean norm ball in the plane is not a polytope")


def exact_body(f: SConcaveFn, s: float | None = None) -> LiftedBody:
    """The lifted body of a polytopal family member, generated exactly.

    Indicators and balls work for any ``s``; the radial profiles need ``s``
    equal to their declared index and a polyhedral norm when ``n = 2``.
    """
    s = f.s if s is None else s
    spec = LiftSpec(s)
    fam = f.family
    if fam is Family.INDICATOR:
        v = f.polytope.vertices
        return LiftedBody.build(v, np.full(len(v), spec.height_map(f.height)), spec.kind)
    if fam is Family.LOGGAUSS:
        raise ValueError("loggauss is not polytopal in lifted coordinates")
    if fam is not Family.BALL and s != f.s:
        raise ValueError(f"{fam.value} is piecewise affine only in its own lift (s = {f.s})")
    unit = _norm_ball_vertices(f.n, f.norm)
    c = f.center
    rho_top = float(spec.height_map(f.height))
    if fam is Family.BALL:
        v = c + f.scale * unit
        return LiftedBody.build(v, np.full(len(v), rho_top), spec.kind)
    if fam is Family.CAP:
        pts = np.vstack([c[None, :], c + f.scale * unit])
        return LiftedBody.build(pts, np.concatenate([[rho_top], np.zeros(len(unit))]), spec.kind)
    # negcap and logtent: the lifted profile is affine in the norm up to the truncation
    R = f.truncation
    pts = np.vstack([c[None, :], c + R * unit])
    if fam is Family.NEGCAP:
        rim = rho_top * (1.0 + R / f.scale)
    else:
        rim = rho_top + R / f.scale
    return LiftedBody.build(pts, np.concatenate([[rho_top], np.full(len(unit), rim)]), spec.kind)
