import numpy as np
import pytest

from ma_isac.errors import InvalidGeometry
from ma_isac.params import (
    ChannelPaths, SystemParams, check_beam_power, db_to_linear, is_feasible_apv,
    linear_to_db, validate_apv,
)


def test_default_params_valid():
    p = SystemParams()
    assert p.n_rx > p.n_tx
    assert p.aperture_tx >= (p.n_tx - 1) * p.d_min


@pytest.mark.parametrize("overrides", [
    dict(n_rx=8, n_tx=8),                      # must be strictly larger
    dict(aperture_tx=2.0),                     # cannot hold 8 antennas
    dict(power_budget=0.0),
    dict(frame_len=8),                         # must exceed n_tx
    dict(target_angle=np.pi / 2),
    dict(d_min=-0.1),
])
def test_invalid_params_rejected(overrides):
    with pytest.raises(InvalidGeometry):
        SystemParams(**overrides)


def test_validate_apv_accepts_and_rejects():
    validate_apv([0.0, 0.5, 1.2], d_min=0.5, aperture=2.0)
    with pytest.raises(InvalidGeometry):
        validate_apv([0.0, 0.4], d_min=0.5, aperture=2.0)
    with pytest.raises(InvalidGeometry):
        validate_apv([0.0, 0.5, 3.0], d_min=0.5, aperture=2.0)
    with pytest.raises(InvalidGeometry):
        validate_apv([0.5, 0.0], d_min=0.5, aperture=2.0)
    assert not is_feasible_apv([0.0, 0.1], 0.5, 2.0)


def test_channel_paths_shape_checks():
    paths = ChannelPaths(gains=[1.0 + 0j], aods=[0.3])
    assert paths.is_los and paths.n_paths == 1
    with pytest.raises(InvalidGeometry):
        ChannelPaths(gains=[1.0, 2.0], aods=[0.3])


def test_beam_power_budget():
    w = np.array([1.0, 1.0]) / np.sqrt(2)
    check_beam_power(w, power_budget=1.0)
    with pytest.raises(InvalidGeometry):
        check_beam_power(np.array([2.0, 0.0]), power_budget=1.0)


def test_db_round_trip():
    assert db_to_linear(20.0) == pytest.approx(100.0)
    assert linear_to_db(db_to_linear(7.3)) == pytest.approx(7.3)
