"""Movable-antenna ISAC placement and beamforming toolbox.

Minimizes the angle-estimation Cramer-Rao bound of a dual-function base
station under a user SNR constraint, by jointly choosing antenna positions
and the transmit beam: closed forms for the receive array and the
single-path transmit case, MM / projected-gradient solvers for multipath,
and brute-force oracles that certify the solvers at desk scale.
"""

from .beamforming import (
    SnrHeadroom, TrigState, ft_value, gamma0, optimal_beamformer, snr_headroom,
    trig_state,
)
from .channel import generate_channel, quantize_apv
from .errors import (
    ApertureTooSmall, ConfigError, DegenerateArg, DegenerateCoefficient,
    DegenerateCollinear, DegenerateGeometry, GridTooLarge, Infeasible,
    InvalidGeometry, IterationCap, MaIsacError, NoFeasibleBoundary,
    OddNrUnsupported, RepairFailed, SingularActiveGram,
)
from .harness import ScenarioConfig, run_beampattern, run_sweep
from .params import ChannelPaths, SystemParams, db_to_linear, linear_to_db
from .projection import project_chain
from .receive_opt import (
    GainRatio, RxSolution, crb_gain_ratio, optimal_rx_positions, spread_metric,
    ulaf_positions, ulah_positions,
)
from .signal_model import (
    CrbValue, beampattern, channel, crb_floor, crb_general, crb_simplified,
    field_response, steering, user_snr,
)
from .transmit_los import LosSolution, bt_bfs, bt_dfs, g_objective
from .transmit_nlos import (
    MmResult, RgpResult, TxSolution, grad_p2, mm_sp1, p1, p2, rgp,
    solve_transmit_nlos, surrogate,
)

__version__ = "0.1.0"
