import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from sconcave.convex_kernel import (
    BodyKind,
    CoefficientBody,
    LiftedBody,
    UnsupportedDimensionError,
    VPolytope,
    hull,
    matrix_times,
    measure,
    minkowski_lambda,
    slice,
    slice_measure,
)

HYPO, EPI = BodyKind.HYPOGRAPH, BodyKind.EPIGRAPH

coords = st.floats(-3, 3, allow_nan=False, width=64)


def cloud(k_min=3, k_max=12, dim=2):
    return arrays(np.float64, st.tuples(st.integers(k_min, k_max), st.just(dim)), elements=coords)


def _square(lo, hi):
    return hull([[lo, lo], [hi, lo], [hi, hi], [lo, hi]])


# --- examples -----------------------------------------------------------------

def test_hull_interior_point_removed():
    P = hull([[0, 0], [1, 0], [0, 1], [0.25, 0.25]])
    assert P == hull([[0, 0], [1, 0], [0, 1]])
    assert len(P) == 3
    np.testing.assert_array_equal(P.vertices[0], [0, 0])


def test_hull_collinear_is_segment():
    P = hull([[0, 0], [1, 1], [2, 2]])
    assert len(P) == 2
    np.testing.assert_allclose(P.vertices, [[0, 0], [2, 2]])
    assert measure(P) == 0.0


def test_hull_3d_simplex():
    pts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    P = hull(pts)
    assert P.dim == 3 and len(P) == 4
    assert measure(P) == pytest.approx(1 / 6, abs=1e-14)


def test_hull_ccw_from_lexmin():
    P = hull([[1, 1], [0, 1], [1, 0], [0, 0]])
    np.testing.assert_allclose(P.vertices, [[0, 0], [1, 0], [1, 1], [0, 1]])


def test_hull_4d_rejected():
    with pytest.raises(UnsupportedDimensionError):
        hull(np.zeros((3, 4)))


def test_empty_distinct_from_point():
    E = VPolytope.empty(2)
    pt = hull([[0.5, 0.5]])
    assert E.is_empty and not pt.is_empty
    assert E != pt
    assert measure(E) == 0.0 and measure(pt) == 0.0


def test_minkowski_squares():
    assert minkowski_lambda(_square(0, 1), _square(0, 3), 0.5) == _square(0, 2)


def test_minkowski_segments_make_square():
    P = hull([[0, 0], [2, 0]])
    Q = hull([[0, 0], [0, 2]])
    assert minkowski_lambda(P, Q, 0.5) == _square(0, 1)


def test_minkowski_lambda_one_is_identity():
    P = hull([[0, 0], [2, 0], [1, 3]])
    assert minkowski_lambda(P, hull([[7, -4]]), 1.0) == P


def test_minkowski_dim_mismatch():
    with pytest.raises(ValueError):
        minkowski_lambda(_square(0, 1), hull([[0.0], [1.0]]), 0.5)


def test_measure_examples():
    assert measure(_square(0, 1)) == pytest.approx(1.0)
    assert measure(hull([[0, 0], [2, 0], [0, 2]])) == pytest.approx(2.0)
    assert measure(hull([[3.0], [5.5]])) == pytest.approx(2.5)


def test_slice_examples():
    B = LiftedBody.build([[0], [2]], [1, 3], HYPO)
    np.testing.assert_allclose(slice(B, 2).vertices.ravel(), [1, 2])
    np.testing.assert_allclose(slice(B, 0).vertices.ravel(), [0, 2])
    assert slice(B, 3.5).is_empty
    E = LiftedBody.build([[0], [1]], [0, -1], EPI)
    np.testing.assert_allclose(slice(E, 0).vertices.ravel(), [0, 1])
    assert slice(E, -2).is_empty


def test_lifted_body_validation():
    with pytest.raises(ValueError):
        LiftedBody.build([[0.0]], [-1.0], HYPO)
    with pytest.raises(ValueError):
        LiftedBody.build(np.zeros((0, 1)), [], EPI)
    with pytest.raises(UnsupportedDimensionError):
        LiftedBody.build(np.zeros((2, 3)), [1, 2], EPI)


def test_lifted_body_prunes_dominated_duplicates():
    B = LiftedBody.build([[0], [0], [1]], [1, 2, 1], HYPO)
    assert len(B) == 2
    np.testing.assert_allclose(B.generators, [[0, 2], [1, 1]])
    E = LiftedBody.build([[0], [0], [1]], [1, 2, 1], EPI)
    np.testing.assert_allclose(E.generators, [[0, 1], [1, 1]])


def test_coefficient_body_orthant():
    with pytest.raises(ValueError):
        CoefficientBody(2, [[1.0, -0.5]])


def test_hat_sum_vertices():
    C = CoefficientBody.hat_sum(2, 3, 0.25)
    assert C.N == 5 and len(C.vertices) == 6
    np.testing.assert_allclose(C.vertices.sum(axis=1), 1.0)
    np.testing.assert_allclose(C.vertices[:, :2].sum(axis=1), 0.25)


def test_matrix_times_simplex_is_hull():
    pts = np.array([[0, 0], [2, 0], [1, 1], [0, 3]], float)
    assert matrix_times(pts, CoefficientBody.simplex(4)) == hull(pts)


def test_matrix_times_hat_sum_is_minkowski():
    rng = np.random.default_rng(0)
    X, Y = rng.normal(size=(4, 2)), rng.normal(size=(5, 2))
    lhs = matrix_times(np.vstack([X, Y]), CoefficientBody.hat_sum(4, 5, 0.3))
    assert lhs == minkowski_lambda(hull(X), hull(Y), 0.3)


# --- properties ---------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(cloud())
def test_hull_idempotent_and_contains_inputs(pts):
    P = hull(pts)
    assert hull(P.vertices) == P
    if measure(P) > 1e-6:
        assert all(P.contains(p, tol=1e-9) for p in pts)


@settings(max_examples=60, deadline=None)
@given(cloud())
def test_hull_matches_qhull_area(pts):
    P = hull(pts)
    try:
        ref = ConvexHull(pts).volume
    except Exception:
        ref = 0.0
    assert measure(P) == pytest.approx(ref, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(cloud(4, 9, dim=3))
def test_hull_3d_matches_qhull(pts):
    try:
        ref = ConvexHull(pts).volume
    except Exception:
        ref = 0.0
    assert measure(hull(pts)) == pytest.approx(ref, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(cloud(), st.floats(0.01, 0.99))
def test_minkowski_self_is_identity(pts, lam):
    P = hull(pts)
    assert minkowski_lambda(P, P, lam) == P


@settings(max_examples=60, deadline=None)
@given(cloud(), cloud())
def test_brunn_minkowski(a, b):
    P, Q = hull(a), hull(b)
    lhs = measure(minkowski_lambda(P, Q, 0.5)) ** 0.5
    assert lhs >= 0.5 * measure(P) ** 0.5 + 0.5 * measure(Q) ** 0.5 - 1e-9


def _random_body(rng, n, kind, k=None):
    k = k or int(rng.integers(2, 9))
    pts = rng.uniform(-1, 1, (k, n))
    h = rng.uniform(0.1, 2.0, k) if kind is HYPO else rng.uniform(-1.0, 1.0, k)
    return LiftedBody.build(pts, h, kind)


def _lp_support(B, z, u):
    """max u.x over the slice at z, by an LP over convex weights (None if empty)."""
    X, h = B.points, B.heights
    if B.kind is HYPO:
        if z < 0:
            return None
        X = np.vstack([X, X])
        h = np.concatenate([h, np.zeros_like(h)])
        A_ub, b_ub = [-h], [-z]
    else:
        A_ub, b_ub = [h], [z]
    m = len(h)
    res = linprog(-(X @ u), A_ub=A_ub, b_ub=b_ub, A_eq=np.ones((1, m)), b_eq=[1.0],
                  bounds=[(0, None)] * m, method="highs")
    return -res.fun if res.status == 0 else None


def _support(P, u):
    return float(np.max(P.vertices @ u))


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("kind", [HYPO, EPI])
def test_slice_matches_lp_support(n, kind):
    rng = np.random.default_rng(10 + n)
    dirs = [np.array([1.0]), np.array([-1.0])] if n == 1 else [
        np.array([np.cos(a), np.sin(a)]) for a in np.linspace(0, 2 * np.pi, 48, endpoint=False)]
    for _ in range(40):
        B = _random_body(rng, n, kind)
        lo, hi = (0.0, B.heights.max()) if kind is HYPO else (B.heights.min(), B.heights.max() + 0.5)
        for z in rng.uniform(lo - 0.1, hi, 5):
            S = slice(B, z)
            ref = [_lp_support(B, z, u) for u in dirs]
            if S.is_empty:
                assert all(r is None for r in ref)
                continue
            gap = max(abs(_support(S, u) - r) for u, r in zip(dirs, ref))
            assert gap <= 1e-6


@pytest.mark.parametrize("n", [1, 2])
def test_slice_monotone(n):
    rng = np.random.default_rng(3 + n)
    for kind in (HYPO, EPI):
        for _ in range(20):
            B = _random_body(rng, n, kind)
            lo = 0.0 if kind is HYPO else B.heights.min() - 0.2
            zs = np.sort(rng.uniform(lo, B.heights.max() + 0.2, 6))
            m = slice_measure(B, zs)
            d = np.diff(m)
            assert np.all(d <= 1e-12) if kind is HYPO else np.all(d >= -1e-12)
            for z1, z2 in zip(zs[:-1], zs[1:]):
                small, big = (slice(B, z2), slice(B, z1)) if kind is HYPO else (slice(B, z1), slice(B, z2))
                if not small.is_empty and len(big) and (n == 1 or measure(big) > 1e-9):
                    assert all(big.contains(v, tol=1e-9) for v in small.vertices)


def test_slice_measure_agrees_with_slice():
    rng = np.random.default_rng(7)
    for n in (1, 2):
        for kind in (HYPO, EPI):
            B = _random_body(rng, n, kind, k=6)
            zs = np.linspace(B.heights.min(), B.heights.max(), 9)
            np.testing.assert_allclose(slice_measure(B, zs), [measure(slice(B, z)) for z in zs], atol=1e-12)


def test_envelope_matches_lp():
    rng = np.random.default_rng(11)
    for kind in (HYPO, EPI):
        B = _random_body(rng, 2, kind, k=7)
        for x in rng.uniform(-0.5, 0.5, (20, 2)):
            val = B.envelope(x)
            if np.isnan(val):
                assert not B.base.contains(x, tol=-1e-9)
                continue
            X, h = B.points, B.heights
            sign = -1 if kind is HYPO else 1
            res = linprog(sign * h, A_eq=np.vstack([X.T, np.ones(len(h))]), b_eq=[*x, 1.0],
                          bounds=[(0, None)] * len(h), method="highs")
            assert val == pytest.approx(res.fun * sign, abs=1e-9)
