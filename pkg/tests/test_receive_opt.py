import numpy as np
import pytest

from ma_isac.errors import InvalidGeometry, OddNrUnsupported
from ma_isac.params import SystemParams
from ma_isac.receive_opt import (
    crb_gain_ratio, end_blocked_positions, eq_gain_closed_form,
    optimal_rx_positions, spread_metric, ulaf_positions, ulah_positions,
)


def rx_params(n_rx, aperture, d=0.5):
    return SystemParams(n_tx=2, n_rx=n_rx, d_min=d, aperture_rx=aperture,
                        aperture_tx=max(1.0, d), frame_len=30)


def test_spread_two_elements():
    assert spread_metric([0.0, 2.0]) == pytest.approx(2.0, rel=1e-14)  # D^2/2


def test_spread_worked_example():
    assert spread_metric([0.0, 0.5, 1.5, 2.0]) == pytest.approx(2.5, rel=1e-14)


def test_spread_shift_invariance():
    rng = np.random.default_rng(0)
    for _ in range(30):
        y = rng.normal(0, 4, 7)
        shift = rng.normal(0, 10)
        assert spread_metric(y + shift) == pytest.approx(spread_metric(y), abs=1e-12 * max(1, spread_metric(y)))


def test_spread_reflection_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(30):
        y = np.sort(rng.uniform(0, 5, 6))
        assert spread_metric(5.0 - y) == pytest.approx(spread_metric(y), rel=1e-12)


def test_optimal_positions_even_example():
    sol = optimal_rx_positions(rx_params(4, 2.0))
    np.testing.assert_allclose(sol.apv, [0.0, 0.5, 1.5, 2.0], atol=1e-14)
    assert sol.spread == pytest.approx(2.5, rel=1e-14)


def test_optimal_positions_two_elements_at_ends():
    sol = end_blocked_positions(2, 0.5, 3.0)
    np.testing.assert_allclose(sol.apv, [0.0, 3.0], atol=1e-15)


def test_optimal_positions_odd_example_both_ties():
    left = optimal_rx_positions(rx_params(5, 3.0), tie="left")
    np.testing.assert_allclose(left.apv, [0.0, 0.5, 1.0, 2.5, 3.0], atol=1e-14)
    right = optimal_rx_positions(rx_params(5, 3.0), tie="right")
    np.testing.assert_allclose(right.apv, [0.0, 0.5, 2.0, 2.5, 3.0], atol=1e-14)
    assert left.spread == pytest.approx(right.spread, rel=1e-14)


def test_optimal_positions_block_structure():
    # First and last floor(n/2) gaps equal d exactly.
    for n_rx in (4, 5, 6, 9, 10):
        sol = optimal_rx_positions(rx_params(n_rx, 8.0))
        gaps = np.diff(sol.apv)
        half = n_rx // 2
        np.testing.assert_allclose(gaps[: half - 1], 0.5, atol=1e-14)
        np.testing.assert_allclose(gaps[len(gaps) - (half - 1):], 0.5, atol=1e-14)


def test_optimal_positions_requires_room():
    with pytest.raises(InvalidGeometry):
        optimal_rx_positions(rx_params(6, 2.0))


def test_spread_hessian_psd_and_boundary_dominance():
    # Quadratic form matrix I - J/n is PSD, so the max sits on the boundary:
    # no random feasible point beats the closed form.
    n = 6
    q = np.eye(n) - np.ones((n, n)) / n
    assert np.linalg.eigvalsh(q).min() >= -1e-12
    params = rx_params(n, 5.0)
    best = optimal_rx_positions(params).spread
    rng = np.random.default_rng(2)
    for _ in range(200):
        gaps = rng.uniform(0.5, 1.0, n - 1)
        if gaps.sum() > 5.0:
            continue
        y = np.concatenate([[0.0], np.cumsum(gaps)])
        assert spread_metric(y) <= best + 1e-12


def test_gain_ratio_worked_example():
    gain = crb_gain_ratio(rx_params(4, 2.0))
    assert gain.direct == pytest.approx(1.125, rel=1e-12)
    assert gain.closed_form == pytest.approx(1.125, rel=1e-12)


def test_gain_ratio_collapses_at_minimum_aperture():
    gain = crb_gain_ratio(rx_params(4, 1.5))
    assert gain.direct == pytest.approx(1.0, rel=1e-12)


def test_gain_ratio_bound_and_cap():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 7)) * 2
        d = float(rng.uniform(0.3, 0.8))
        aperture = float(rng.uniform((n - 1) * d, 12 * (n - 1) * d))
        gain = crb_gain_ratio(rx_params(n, aperture, d=d))
        bound = 3.0 * (n - 1) / (n + 1)
        assert gain.closed_form == pytest.approx(gain.direct, rel=1e-10)
        assert gain.direct < bound < 3.0
        assert gain.upper_bound == pytest.approx(bound)
        assert gain.upper_bound_db < 10 * np.log10(3.0) + 1e-12  # 4.77 dB cap


def test_gain_ratio_odd_has_no_closed_form():
    gain = crb_gain_ratio(rx_params(5, 4.0))
    assert gain.closed_form is None
    assert gain.direct > 1.0
    with pytest.raises(OddNrUnsupported):
        eq_gain_closed_form(5, 0.5, 4.0)


def test_ulah_ulaf_baselines():
    np.testing.assert_allclose(ulah_positions(3, 0.5), [0.0, 0.5, 1.0], atol=1e-15)
    np.testing.assert_allclose(ulaf_positions(3, 2.0), [0.0, 1.0, 2.0], atol=1e-15)
    np.testing.assert_allclose(
        ulaf_positions(4, 3 * 0.5), ulah_positions(4, 0.5), atol=1e-15
    )


def test_ulah_over_ulaf_ratio():
    gain = crb_gain_ratio(rx_params(6, 10.0))
    assert gain.ulah_over_ulaf == pytest.approx(10.0**2 / (5 * 0.5) ** 2, rel=1e-12)
