import numpy as np
import pytest

from ma_isac.beamforming import (
    ft_value, ft_value_direct, gamma0, optimal_beamformer, snr_headroom, trig_state,
)
from ma_isac.errors import Infeasible
from ma_isac.params import ChannelPaths, SystemParams
from ma_isac.signal_model import channel, steering
from ma_isac.transmit_los import bt_bfs


def random_vectors(rng, n):
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    x = np.concatenate([[0.0], np.cumsum(rng.uniform(0.5, 1.5, n - 1))])
    return h, steering(x, rng.uniform(-1.0, 1.0))


def params_with(gamma, n_t=6):
    return SystemParams(n_tx=n_t, n_rx=n_t + 2, snr_threshold=gamma)


def in_snr_tight_branch(h, a, params):
    need = params.snr_threshold * params.noise_comm
    return params.power_budget * abs(np.vdot(h, a)) ** 2 <= a.size * need


def test_zero_threshold_gives_full_power_sensing():
    rng = np.random.default_rng(0)
    h, a = random_vectors(rng, 6)
    params = params_with(0.0)
    w = optimal_beamformer(h, a, params)
    np.testing.assert_allclose(
        w, np.sqrt(params.power_budget) * a / np.linalg.norm(a), atol=1e-12
    )


def test_constraint_tight_branch_identities():
    rng = np.random.default_rng(1)
    checked = 0
    while checked < 50:
        h, a = random_vectors(rng, 6)
        gamma = float(rng.uniform(1.0, 400.0))
        params = params_with(gamma)
        need = gamma * params.noise_comm
        if need > params.power_budget * np.vdot(h, h).real:
            continue
        if not in_snr_tight_branch(h, a, params):
            continue
        w = optimal_beamformer(h, a, params)
        assert np.vdot(w, w).real == pytest.approx(params.power_budget, abs=1e-12 * params.power_budget)
        assert abs(np.vdot(h, w)) ** 2 == pytest.approx(need, rel=1e-10)
        checked += 1


def test_full_power_branch_meets_snr_strictly():
    rng = np.random.default_rng(2)
    checked = 0
    while checked < 50:
        h, a = random_vectors(rng, 5)
        params = params_with(float(rng.uniform(0.1, 5.0)), n_t=5)
        need = params.snr_threshold * params.noise_comm
        if in_snr_tight_branch(h, a, params):
            continue
        w = optimal_beamformer(h, a, params)
        assert np.vdot(w, w).real == pytest.approx(params.power_budget, rel=1e-12)
        assert abs(np.vdot(h, w)) ** 2 > need
        checked += 1


def test_infeasible_snr_raises():
    h = np.array([0.1 + 0j, 0.0])
    a = np.ones(2, dtype=complex)
    params = SystemParams(n_tx=2, n_rx=3, snr_threshold=1e6)
    with pytest.raises(Infeasible):
        optimal_beamformer(h, a, params)
    with pytest.raises(Infeasible):
        optimal_beamformer(np.zeros(2, dtype=complex), a, params)


def test_collinear_channel_and_steering():
    a = steering([0.0, 0.5, 1.0], 0.4)
    h = (2.0 - 1.0j) * a
    params = SystemParams(n_tx=3, n_rx=4, snr_threshold=1e3)
    need = params.snr_threshold * params.noise_comm
    assert in_snr_tight_branch(h, a, params)
    assert need <= params.power_budget * np.vdot(h, h).real
    w = optimal_beamformer(h, a, params)
    assert np.vdot(w, w).real == pytest.approx(params.power_budget, rel=1e-12)
    assert abs(np.vdot(h, w)) ** 2 >= need * (1 - 1e-9)


def grid_max_target_gain(h, a, params, n_tau=400, n_chi=600):
    """Brute-force max of |a^H w|^2 over unit-power combinations in span{h,a}.

    Parameterizes w = sqrt(P) (cos t e^{j c} u1 + sin t a_u) and scans the
    (t, c) rectangle, keeping only SNR-feasible points.
    """
    p_t = params.power_budget
    need = params.snr_threshold * params.noise_comm
    u1 = h / np.linalg.norm(h)
    a_perp = a - np.vdot(u1, a) * u1
    a_u = a_perp / np.linalg.norm(a_perp)
    tau = np.linspace(0.0, np.pi / 2, n_tau)
    chi = np.linspace(0.0, 2 * np.pi, n_chi, endpoint=False)
    cos_t, sin_t = np.cos(tau)[:, None], np.sin(tau)[:, None]
    snr = p_t * cos_t**2 * np.vdot(h, h).real
    feasible = snr >= need * (1 - 1e-12)
    beta1 = np.vdot(a, u1)
    beta2 = np.vdot(a, a_u)
    gain = p_t * np.abs(
        cos_t * np.exp(1j * chi)[None, :] * beta1 + sin_t * beta2
    ) ** 2
    gain = np.where(feasible, gain, -np.inf)
    return float(gain.max())


def test_target_gain_matches_two_dimensional_grid_oracle():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 30:
        h, a = random_vectors(rng, 6)
        h_sq = np.vdot(h, h).real
        lo = np.abs(np.vdot(h, a)) ** 2 * 100.0 / (6 * 1.0)
        hi = 100.0 * h_sq
        if hi <= lo * 1.05:
            continue
        gamma = float(rng.uniform(lo * 1.01, hi * 0.99))
        params = params_with(gamma)
        w = optimal_beamformer(h, a, params)
        ours = abs(np.vdot(a, w)) ** 2
        oracle = grid_max_target_gain(h, a, params)
        assert ours >= oracle * (1 - 1e-4)
        checked += 1


# --- trigonometric state ----------------------------------------------------

def test_trig_state_collinear_orthogonal_boundary():
    params = SystemParams(n_tx=4, n_rx=5, snr_threshold=1.0)
    a = steering([0.0, 0.6, 1.2, 1.9], 0.2)
    state = trig_state(a, a, params)
    assert state.upsilon == pytest.approx(0.0, abs=1e-7)

    h_perp = np.array([1.0, -1.0, 1.0, -1.0], dtype=complex)
    h_perp -= (np.vdot(a, h_perp) / np.vdot(a, a)) * a
    state = trig_state(h_perp, a, params)
    assert state.upsilon == pytest.approx(np.pi / 2, abs=1e-7)

    h = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    boundary = SystemParams(n_tx=4, n_rx=5, snr_threshold=100.0)  # Gamma sigma = P ||h||^2
    state = trig_state(h, a, boundary)
    assert state.phi == pytest.approx(np.pi / 2, abs=1e-7)


def test_ft_two_forms_agree_and_match_beamformer():
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 40:
        h, a = random_vectors(rng, 6)
        gamma = float(rng.uniform(1.0, 300.0))
        params = params_with(gamma)
        need = gamma * params.noise_comm
        if need > params.power_budget * np.vdot(h, h).real:
            continue
        if not in_snr_tight_branch(h, a, params):
            continue
        ft = ft_value(h, a, params)
        assert ft == pytest.approx(ft_value_direct(h, a, params), rel=1e-10)
        w = optimal_beamformer(h, a, params)
        assert ft**2 == pytest.approx(abs(np.vdot(a, w)) ** 2, rel=1e-9)
        state = trig_state(h, a, params)
        assert np.sin(state.upsilon + state.phi) == pytest.approx(
            ft / np.sqrt(a.size * params.power_budget), rel=1e-10
        )
        checked += 1


def test_snr_branch_condition_equals_angle_condition():
    rng = np.random.default_rng(5)
    for _ in range(60):
        h, a = random_vectors(rng, 5)
        gamma = float(rng.uniform(0.5, 300.0))
        params = params_with(gamma, n_t=5)
        need = gamma * params.noise_comm
        if need > params.power_budget * np.vdot(h, h).real:
            continue
        state = trig_state(h, a, params)
        tight = in_snr_tight_branch(h, a, params)
        angle_sum = state.upsilon + state.phi
        if abs(angle_sum - np.pi / 2) > 1e-7:
            assert tight == (angle_sum >= np.pi / 2)


# --- Gamma_0 ----------------------------------------------------------------

def test_gamma0_aligned_los_closed_form():
    # With enough aperture, the solver aligns all phasors: |h^H a| = |sigma| n.
    params = SystemParams(n_tx=4, n_rx=6, aperture_tx=16.0, aperture_rx=16.0)
    sigma = 0.8 - 0.3j
    paths = ChannelPaths(gains=[sigma], aods=[np.pi / 3])
    sol = bt_bfs(params, np.pi / 3, 0.0)
    assert sol.layer == 0
    h = channel(sol.apv, paths)
    a = steering(sol.apv, 0.0)
    expected = params.power_budget * abs(sigma) ** 2 * params.n_tx / params.noise_comm
    assert gamma0(h, a, params) == pytest.approx(expected, rel=1e-10)


def test_snr_headroom_zero_for_identical_arrays():
    params = SystemParams(n_tx=4, n_rx=6)
    paths = ChannelPaths(gains=[1.0, 0.2j], aods=[0.3, -0.7])
    ula = 0.5 * np.arange(4)
    head = snr_headroom(paths, ula, params, x_ula=ula)
    assert head.delta_db == pytest.approx(0.0, abs=1e-12)


def test_snr_headroom_positive_for_optimized_los_positions():
    rng = np.random.default_rng(6)
    for trial in range(10):
        theta_t1 = float(rng.uniform(0.2, 1.3))
        params = SystemParams(n_tx=5, n_rx=7, aperture_tx=6.0, aperture_rx=6.0)
        paths = ChannelPaths(gains=[1.0 + 0.5j], aods=[theta_t1])
        sol = bt_bfs(params, theta_t1, 0.0)
        head = snr_headroom(paths, sol.apv, params)
        assert head.gamma0_opt >= head.gamma0_ula * (1 - 1e-9)
