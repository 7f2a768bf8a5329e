import numpy as np
import pytest

from sconcave.convex_kernel import BodyKind, CoefficientBody, LiftedBody, hull
from sconcave.lift import LiftSpec, lift_points, nu_measure
from sconcave.random_approx import integral_approx
from sconcave.shadow import (
    LpsSpec,
    ShadowEpiSpec,
    brunn_profile,
    lps_at,
    project_shadow,
    scan_convexity,
    steiner_convexity_probe,
)

HYPO, EPI = BodyKind.HYPOGRAPH, BodyKind.EPIGRAPH
TWO = LpsSpec(1.0, [[0.0], [1.0]], [1.0, -1.0], [1.0, 1.0], 0, (0.0, 0.5), 21)


def random_lps(rng, n, s, grid=21):
    k = int(rng.integers(2, 7))
    return LpsSpec(s, rng.uniform(-1, 1, (k, n)), rng.uniform(-1, 1, k), rng.uniform(0.3, 1.5, k),
                   int(rng.integers(0, n)), (-1.0, 1.0), grid)


# --- linear parameter systems ---------------------------------------------------

def test_lps_examples():
    a0 = lps_at(TWO, 0.0)
    np.testing.assert_allclose(a0(np.array([[0.0], [0.5], [1.0]])), 1.0)
    assert integral_approx(a0) == pytest.approx(1.0, abs=1e-13)
    a = lps_at(TWO, 0.25)
    assert integral_approx(a) == pytest.approx(0.5, abs=1e-13)
    assert a([0.2]) == 0.0 and a([0.3]) == pytest.approx(1.0)


def test_lps_out_of_range():
    with pytest.raises(ValueError):
        lps_at(TWO, 0.6)


def test_lps_validation():
    with pytest.raises(ValueError):
        LpsSpec(1.0, [[0.0]], [1.0], [0.0])
    with pytest.raises(ValueError):
        LpsSpec(1.0, [[0.0]], [1.0], [1.0], t_range=(1.0, 1.0))
    with pytest.raises(ValueError):
        LpsSpec(1.0, [[0.0], [1.0]], [1.0], [1.0, 1.0])


def test_two_point_fixture_exact_curve():
    rep = scan_convexity(TWO)
    np.testing.assert_allclose(rep.values, np.abs(1 - 2 * rep.t), atol=1e-9)
    assert rep.min_second_difference >= -1e-9
    assert rep.ok


def test_equal_speeds_constant_integral():
    rng = np.random.default_rng(0)
    for s in (-0.4, 0.0, 1.0):
        spec = LpsSpec(s, rng.uniform(-1, 1, (5, 2)), np.full(5, 0.7), rng.uniform(0.5, 1, 5), 1, (0, 2), 11)
        rep = scan_convexity(spec)
        np.testing.assert_allclose(rep.values, rep.values[0], rtol=1e-12)
        np.testing.assert_allclose(rep.second_differences, 0.0, atol=1e-12)


@pytest.mark.parametrize("s", [-0.4, 0.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [1, 2])
def test_lps_integral_convex(s, n):
    rng = np.random.default_rng(int(10 * s) + 5 * n + 10)
    for _ in range(5):
        rep = scan_convexity(random_lps(rng, n, s))
        assert rep.normalized_min >= -1e-7


def test_report_rows():
    rep = scan_convexity(TWO)
    rows = rep.rows()
    assert len(rows) == 21
    assert np.isnan(rows[0][2]) and np.isnan(rows[-1][2])
    assert rows[1][2] == pytest.approx(rep.second_differences[0])


# --- shadow systems -------------------------------------------------------------

def test_project_shadow_examples():
    spec = ShadowEpiSpec([[0.0], [1.0]], [0.0, -1.0], [0.0, 1.0], 0, EPI)
    B0 = project_shadow(spec, 0.0)
    np.testing.assert_allclose(B0.generators, [[0, 0], [1, -1]])
    B1 = project_shadow(spec, 1.0)
    np.testing.assert_allclose(B1.generators, [[0, 0], [2, -1]])
    single = ShadowEpiSpec([[0.5, 0.5]], [2.0], [3.0], 1, HYPO)
    np.testing.assert_allclose(project_shadow(single, 1.0).generators, [[0.5, 3.5, 2.0]])


def test_shadow_reproduces_lps():
    rng = np.random.default_rng(4)
    for s in (-0.25, 0.0, 1.0, 2.0):
        lps = random_lps(rng, 2, s)
        spec = LiftSpec(s)
        sh = ShadowEpiSpec(lps.points, spec.height_map(lps.values), lps.speeds, lps.theta, spec.kind)
        for t in (-1.0, -0.3, 0.0, 0.8):
            assert project_shadow(sh, t).allclose(lps_at(lps, t).body, atol=1e-12)


@pytest.mark.parametrize("s", [-0.4, 0.0, 0.5, 1.0, 2.0])
def test_shadow_nu_measure_convex(s):
    rng = np.random.default_rng(int(10 * s) + 60)
    spec = LiftSpec(s)
    for n in (1, 2):
        k = 6
        vals = rng.uniform(0.3, 1.5, k)
        sh = ShadowEpiSpec(rng.uniform(-1, 1, (k, n)), spec.height_map(vals), rng.uniform(-1, 1, k), 0, spec.kind)
        t = np.linspace(-1, 1, 21)
        v = np.array([nu_measure(project_shadow(sh, tk), s) for tk in t])
        d2 = v[:-2] - 2 * v[1:-1] + v[2:]
        assert d2.min() / max(1.0, np.abs(v).max()) >= -1e-7


# --- Steiner probe ----------------------------------------------------------------

def test_probe_single_generator_is_zero():
    for kind in (HYPO, EPI):
        rep = steiner_convexity_probe([1.0], [[0.0]], CoefficientBody(1, [[1.0]]), kind, n_lines=3)
        assert rep.ok
        assert all(np.all(v == 0.0) for v in rep.values)


def test_probe_even_and_convex_random():
    rng = np.random.default_rng(17)
    for it in range(20):
        N = int(rng.integers(2, 6))
        kind = HYPO if it % 2 else EPI
        C = CoefficientBody.simplex(N) if it % 3 else CoefficientBody(N, rng.uniform(0, 1, (4, N)) + 0.01)
        s = 1.0 if kind is HYPO else (0.0 if it % 4 else -0.4)
        rep = steiner_convexity_probe(rng.uniform(0.2, 2, N), np.zeros((N, 1)), C, kind, s=s, seed=it)
        assert rep.evenness_gap <= 1e-9
        assert rep.min_midpoint_margin >= -1e-7


def test_probe_hat_sum_2d():
    # base dimension 2, theta = e_1, offsets y_i along e_2
    rng = np.random.default_rng(2)
    y = np.column_stack([np.zeros(5), rng.uniform(-1, 1, 5)])
    C = CoefficientBody.hat_sum(2, 3, 0.4)
    rep = steiner_convexity_probe(rng.uniform(0.3, 1.5, 5), y, C, HYPO, s=0.5, theta=0, n_lines=4)
    assert rep.ok


def test_probe_validation():
    with pytest.raises(ValueError):
        steiner_convexity_probe([1.0, 1.0], [[0.0, 1.0], [0.0, 0.0]], CoefficientBody.simplex(2), HYPO, theta=1)
    with pytest.raises(ValueError):
        steiner_convexity_probe([1.0, 1.0], [[0.0], [0.0]], CoefficientBody.simplex(2), EPI, s=1.0)


# --- Brunn profile --------------------------------------------------------------

def test_brunn_square_and_triangle():
    sq = brunn_profile(hull([[0, 0], [1, 0], [1, 1], [0, 1]]), 0, 11)
    np.testing.assert_allclose(sq.values, 1.0)
    assert sq.ok
    tri = brunn_profile(hull([[0, 0], [1, 0], [0, 1]]), 0, 11)
    np.testing.assert_allclose(tri.values, 1 - tri.t, atol=1e-12)
    assert tri.ok


def test_brunn_hexagon_hat():
    ang = np.pi / 3 * np.arange(6)
    rep = brunn_profile(hull(np.column_stack([np.cos(ang), np.sin(ang)])), 0, 41)
    h = np.sqrt(3)
    exact = np.where(np.abs(rep.t) <= 0.5, h, 2 * h * (1 - np.abs(rep.t)))
    np.testing.assert_allclose(rep.values, exact, atol=1e-12)
    assert rep.ok


def test_brunn_random_polygons_concave():
    rng = np.random.default_rng(21)
    for _ in range(30):
        K = hull(rng.normal(size=(int(rng.integers(3, 15)), 2)))
        for theta in (0, 1):
            assert brunn_profile(K, theta, 31).min_second_difference >= -1e-9


def test_brunn_rejects_degenerate():
    with pytest.raises(ValueError):
        brunn_profile(hull([[0, 0], [1, 1]]))
