import numpy as np
import pytest

from ma_isac.errors import DegenerateGeometry
from ma_isac.params import ChannelPaths, SystemParams
from ma_isac.signal_model import (
    beampattern, channel, crb_floor, crb_general, crb_simplified, field_response,
    steering, steering_derivative, user_snr,
)

RNG = np.random.default_rng(1234)


def random_apv(rng, n, lo=0.5, hi=2.0):
    return np.concatenate([[0.0], np.cumsum(rng.uniform(lo, hi, n - 1))])


# --- steering ---------------------------------------------------------------

def test_steering_single_element_is_one():
    assert steering([0.0], 0.7) == pytest.approx(1.0)


def test_steering_half_wavelength_broadside_and_endfire():
    np.testing.assert_allclose(steering([0.0, 0.5], np.pi / 2), [1.0, -1.0], atol=1e-12)
    np.testing.assert_allclose(steering([0.0, 0.5], 0.0), [1.0, 1.0], atol=1e-12)


def test_steering_unit_modulus():
    for _ in range(50):
        x = random_apv(RNG, 8)
        a = steering(x, RNG.uniform(-1.5, 1.5))
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-14)


# --- channel model ----------------------------------------------------------

def test_field_response_single_path_is_steering():
    x = random_apv(RNG, 5)
    aod = 0.43
    g = field_response(x, ChannelPaths(gains=[1.0], aods=[aod]))
    np.testing.assert_allclose(g[0], steering(x, aod), atol=1e-14)


def test_field_response_two_path_composition():
    g = field_response([0.0, 0.5], ChannelPaths(gains=[1.0, 1.0], aods=[0.0, np.pi / 2]))
    np.testing.assert_allclose(g[0], [1.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(g[1], [1.0, -1.0], atol=1e-12)


def test_channel_single_unit_path_is_steering():
    x = random_apv(RNG, 6)
    aod = -0.8
    h = channel(x, ChannelPaths(gains=[1.0], aods=[aod]))
    np.testing.assert_allclose(h, steering(x, aod), atol=1e-13)


def test_channel_zero_gains():
    x = random_apv(RNG, 4)
    h = channel(x, ChannelPaths(gains=[0.0, 0.0], aods=[0.1, 0.2]))
    np.testing.assert_allclose(h, 0.0, atol=0.0)


def test_channel_norm_matches_term_by_term_sum():
    # Independent oracle: accumulate |sum_p sigma_p e^{-j 2 pi sin(aod_p) x_k}|^2
    # entry by entry with plain Python loops.
    rng = np.random.default_rng(77)
    x = random_apv(rng, 5)
    gains = rng.normal(size=3) + 1j * rng.normal(size=3)
    aods = rng.uniform(-1.2, 1.2, 3)
    h = channel(x, ChannelPaths(gains=gains, aods=aods))
    expected = 0.0
    for xk in x:
        term = 0.0 + 0.0j
        for sig, aod in zip(gains, aods):
            term += sig * np.exp(-2j * np.pi * np.sin(aod) * xk)
        expected += abs(term) ** 2
    assert np.vdot(h, h).real == pytest.approx(expected, rel=1e-12)


# --- SNR --------------------------------------------------------------------

def test_user_snr_orthogonal_is_zero():
    assert user_snr([1.0, 0.0], [0.0, 1.0], 1.0) == 0.0


def test_user_snr_unit_case_and_scaling():
    h = np.array([1.0, 0.0], dtype=complex)
    assert user_snr(h, h, 1.0) == pytest.approx(1.0)
    w = RNG.normal(size=2) + 1j * RNG.normal(size=2)
    c = 0.3 - 1.7j
    assert user_snr(h, c * w, 2.0) == pytest.approx(abs(c) ** 2 * user_snr(h, w, 2.0))


# --- CRB --------------------------------------------------------------------

def _random_instance(rng, n_t=4, n_r=6):
    params = SystemParams(
        n_tx=n_t, n_rx=n_r, aperture_tx=30.0, aperture_rx=30.0,
        target_angle=float(rng.uniform(-1.2, 1.2)),
    )
    x = random_apv(rng, n_t)
    y = random_apv(rng, n_r)
    w = rng.normal(size=n_t) + 1j * rng.normal(size=n_t)
    return params, x, y, w


def test_crb_degenerate_single_receive_element():
    params, x, _, w = _random_instance(np.random.default_rng(3))
    with pytest.raises(DegenerateGeometry):
        crb_simplified(x, [0.0], w, params)


def test_crb_degenerate_beam_orthogonal_to_target():
    params, x, y, _ = _random_instance(np.random.default_rng(4))
    a = steering(x, params.target_angle)
    w = np.zeros_like(a)
    w[0], w[1] = a[1].conj(), -a[0].conj()  # exactly orthogonal to a
    assert abs(np.vdot(a, w)) < 1e-12
    with pytest.raises(DegenerateGeometry):
        crb_general(x, y, w, params)


def test_crb_general_matches_simplified():
    rng = np.random.default_rng(5)
    for _ in range(100):
        params, x, y, w = _random_instance(rng)
        c_gen = crb_general(x, y, w, params)
        c_simp = crb_simplified(x, y, w, params)
        assert c_gen.crb == pytest.approx(c_simp.crb, rel=1e-10)
        assert c_gen.root_crb == pytest.approx(np.sqrt(c_gen.crb), rel=1e-12)


def explicit_traces(x, y, w, theta):
    """Trace identities recomputed from explicit matrix products (small n only)."""
    a = steering(x, theta)
    b = steering(y, theta)
    da = steering_derivative(x, theta)
    db = -2j * np.pi * y * np.cos(theta) * b
    mat_a = np.outer(b, a.conj())
    mat_da = np.outer(db, a.conj()) + np.outer(b, da.conj())
    r_x = np.outer(w, np.conj(w))
    return (
        np.trace(mat_a.conj().T @ mat_a @ r_x),
        np.trace(mat_da.conj().T @ mat_a @ r_x),
        np.trace(mat_da.conj().T @ mat_da @ r_x),
    )


def test_trace_identities_against_explicit_matrices():
    rng = np.random.default_rng(6)
    for _ in range(30):
        params, x, y, w = _random_instance(rng, n_t=3, n_r=5)
        theta = params.target_angle
        t_aa, t_da_a, t_da_da = explicit_traces(x, y, w, theta)
        a = steering(x, theta)
        da = steering_derivative(x, theta)
        beta = np.vdot(a, w)
        gamma = np.vdot(da, w)
        k = 2 * np.pi * np.cos(theta)
        n_r = y.size
        assert t_aa.real == pytest.approx(n_r * abs(beta) ** 2, rel=1e-10)
        expect_da_a = 1j * k * y.sum() * abs(beta) ** 2 + n_r * beta * np.conj(gamma)
        assert abs(t_da_a - expect_da_a) <= 1e-10 * max(abs(expect_da_a), 1.0)
        expect_da_da = (
            k**2 * (y @ y) * abs(beta) ** 2
            + (1j * k * y.sum() * (gamma * np.conj(beta) - beta * np.conj(gamma))).real
            + n_r * abs(gamma) ** 2
        )
        assert t_da_da.real == pytest.approx(expect_da_da, rel=1e-10)


def test_crb_strictly_decreasing_in_target_gain():
    rng = np.random.default_rng(7)
    params, x, y, _ = _random_instance(rng)
    a = steering(x, params.target_angle)
    w_perp = rng.normal(size=x.size) + 1j * rng.normal(size=x.size)
    w_perp -= (np.vdot(a, w_perp) / np.vdot(a, a)) * a
    prev = np.inf
    for mix in (0.2, 0.5, 0.9):
        w = mix * a + (1 - mix) * w_perp
        value = crb_simplified(x, y, w, params).crb
        assert value < prev
        prev = value


def test_crb_quarter_under_aperture_doubling():
    params, x, y, w = _random_instance(np.random.default_rng(8))
    base = crb_simplified(x, y, w, params).crb
    doubled = crb_simplified(x, 2.0 * y, w, params).crb
    assert doubled == pytest.approx(base / 4.0, rel=1e-12)


def test_crb_floor_attained_by_matched_beam():
    params, x, y, _ = _random_instance(np.random.default_rng(9))
    a = steering(x, params.target_angle)
    w = np.sqrt(params.power_budget) * a / np.linalg.norm(a)
    assert crb_simplified(x, y, w, params).crb == pytest.approx(
        crb_floor(y, params).crb, rel=1e-12
    )


# --- beampattern ------------------------------------------------------------

def test_beampattern_matched_peak():
    params = SystemParams()
    x = 0.5 * np.arange(params.n_tx)
    theta = 0.35
    a = steering(x, theta)
    w = np.sqrt(params.power_budget) * a / np.linalg.norm(a)
    peak = beampattern(x, w, [theta])[0]
    assert peak == pytest.approx(params.n_tx * params.power_budget, rel=1e-12)
    grid = np.linspace(-np.pi / 2, np.pi / 2, 721)
    assert beampattern(x, w, grid).max() <= peak * (1 + 1e-9)


def test_beampattern_zero_weights():
    np.testing.assert_array_equal(beampattern([0.0, 0.5], [0.0, 0.0], [0.1, 0.2]), 0.0)


def test_beampattern_two_element_null():
    # Independent check by direct phasor sum at the endfire angle.
    w = np.array([1.0, 1.0]) / np.sqrt(2)
    x = [0.0, 0.5]
    direct = abs(
        np.exp(2j * np.pi * 0.0 * 1.0) * w[0] + np.exp(2j * np.pi * 0.5 * 1.0) * w[1]
    ) ** 2
    assert direct == pytest.approx(0.0, abs=1e-12)
    assert beampattern(x, w, [np.pi / 2])[0] == pytest.approx(direct, abs=1e-12)
