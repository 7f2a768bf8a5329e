import math

import numpy as np
import pytest

from sconcave.convex_kernel import hull, measure
from sconcave.random_approx import (
    SampleCloud,
    build_approx,
    integral_approx,
    rng_for,
    sample_under_graph,
)
from sconcave.smeans import SConcaveFn, integral_closed_form

CAP = SConcaveFn.cap([0.0], 1, 1, 1.0)


def instances():
    c = SConcaveFn
    return [
        (c.cap([0.5], 1, 1, 1.0), 1.0),
        (c.cap([0.0], 2, 1.5, 0.5), 0.5),
        (c.cap([0.0, 0.0], 1, 1, 2.0), 2.0),
        (c.cap([0.0, 1.0], 1, 2, 1.0, norm=1), 0.0),
        (c.negcap([0.0], 1, 1, -0.4, 2.0), -0.4),
        (c.negcap([0.0, 0.0], 1, 1, -0.25, 1.5), -0.25),
        (c.log_gauss([0.0], 1.0, 2.0), 0.0),
        (c.log_tent([1.0, 1.0], 0.5, 1.0, 1.5, norm=2), 0.0),
        (c.interval(0, 2, s=-0.2), -0.2),
        (c.indicator([[0, 0], [1, 0], [0, 1]]), 1.0),
    ]


def test_points_under_graph():
    for f, _ in instances():
        c = sample_under_graph(f, 500, seed=3)
        assert len(c) == 500
        assert np.all(c.values > 0)
        assert np.all(c.values <= f(c.points if f.n > 1 else c.points[:, 0]))


def test_acceptance_fraction():
    c = sample_under_graph(CAP, 100_000, seed=11)
    p = c.n_accepted / c.n_proposed
    sigma = math.sqrt(0.25 / c.n_proposed)
    assert abs(p - 0.5) <= 3 * sigma


def test_deterministic_and_stream_separated():
    a = sample_under_graph(CAP, 200, seed=5, stream=(1, 2))
    b = sample_under_graph(CAP, 200, seed=5, stream=(1, 2))
    c = sample_under_graph(CAP, 200, seed=5, stream=(1, 3))
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_prefix_nesting():
    big = sample_under_graph(CAP, 300, seed=9)
    for N in (1, 7, 64, 299):
        small = sample_under_graph(CAP, N, seed=9)
        np.testing.assert_array_equal(small.points, big.points[:N])
        np.testing.assert_array_equal(big.head(N).values, small.values)


def test_rng_for_is_philox():
    g = rng_for(1, 2, 3)
    assert type(g.bit_generator).__name__ == "Philox"
    assert rng_for(2**64 - 1).random() != rng_for(0).random()


def test_zero_measure_rejected():
    with pytest.raises(ValueError):
        sample_under_graph(SConcaveFn.indicator([[0, 0], [1, 1]]), 10, seed=0)
    with pytest.raises(ValueError):
        sample_under_graph(CAP, 0, seed=0)


def test_build_approx_examples():
    a = build_approx(SampleCloud([[0], [2]], [1, 3]), 1.0)
    x = np.linspace(0, 2, 9)
    np.testing.assert_allclose(a(x[:, None]), 1 + x)
    assert integral_approx(a) == pytest.approx(4.0, abs=1e-13)
    assert a([2.5]) == 0.0

    e = build_approx(SampleCloud([[0], [1]], [1, math.e]), 0.0)
    x = np.linspace(0, 1, 9)
    np.testing.assert_allclose(e(x[:, None]), np.exp(x), rtol=1e-13)
    assert integral_approx(e) == pytest.approx(math.e - 1, abs=1e-13)

    n = build_approx(SampleCloud([[0], [1]], [1, 0.25]), -0.5)
    np.testing.assert_allclose(n(x[:, None]), (1 + x) ** -2.0, rtol=1e-13)
    assert integral_approx(n) == pytest.approx(0.5, abs=1e-13)


def test_support_is_hull_of_samples():
    rng = np.random.default_rng(0)
    c = sample_under_graph(SConcaveFn.cap([0.0, 0.0], 1, 1, 1.0), 30, seed=1)
    a = build_approx(c, 1.0)
    H = hull(c.points)
    x = rng.uniform(-1, 1, (500, 2))
    inside = np.array([H.contains(p, tol=-1e-9) for p in x])
    outside = np.array([not H.contains(p, tol=1e-9) for p in x])
    vals = a(x)
    assert np.all(vals[inside] > 0)
    assert np.all(vals[outside] == 0)


@pytest.mark.parametrize("idx", range(len(instances())))
def test_domination_and_nested_monotonicity(idx):
    f, s = instances()[idx]
    rng = np.random.default_rng(idx)
    lo, hi = f.support_box
    big = sample_under_graph(f, 64, seed=idx)
    x = rng.uniform(lo, hi, (1000, f.n))
    prev_vals, prev_int = None, -np.inf
    fx = f(x if f.n > 1 else x[:, 0])
    for N in (f.n + 2, 8, 16, 64):
        a = build_approx(big.head(N), s)
        v = a(x)
        assert np.all(v <= fx + 1e-9)
        I = integral_approx(a)
        assert I >= prev_int - 1e-12
        if prev_vals is not None:
            assert np.all(v >= prev_vals - 1e-12)
        prev_vals, prev_int = v, I
    assert prev_int <= integral_closed_form(f) + 1e-9


def test_s1_integral_equals_hypograph_volume():
    for n in (1, 2):
        f = SConcaveFn.cap(np.zeros(n), 1, 1, 1.0)
        for seed in range(10):
            c = sample_under_graph(f, 12, seed=seed)
            P = np.column_stack([c.points, c.values])
            feet = np.column_stack([c.points, np.zeros(len(c))])
            vol = measure(hull(np.vstack([P, feet])))
            assert integral_approx(build_approx(c, 1.0)) == pytest.approx(vol, abs=1e-12)


def test_law_of_large_numbers_trend():
    Ns = [4, 16, 64, 256]
    ratios = np.empty((50, len(Ns)))
    for k in range(50):
        c = sample_under_graph(CAP, Ns[-1], seed=1234, stream=(k,))
        for j, N in enumerate(Ns):
            ratios[k, j] = integral_approx(build_approx(c.head(N), 1.0))
    med = np.median(ratios, axis=0)
    assert np.all(np.diff(med) >= 0)
    assert med[-1] >= 0.9
