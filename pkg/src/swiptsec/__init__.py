"""Secrecy-rate beamforming for MISO multicast SWIPT with artificial noise.

Typical use::

    from swiptsec import SystemParams, dbm_to_watts, generate_channels, solve_instance
    params = SystemParams(p_total=dbm_to_watts(30))
    result = solve_instance(params, generate_channels(params, seed=0))
"""

from .conic import ConicProgram, StandardForm, get_backend
from .harness import ExperimentConfig, InstanceResult, SweepRow, solve_instance, sweep_energy, sweep_power
from .inner import energy_feasibility, problem_residuals, recover_design, solve_inner
from .metrics import TransmitDesign, achievable_secrecy_rate, eve_rate_exact, eve_rate_upper, user_rate
from .model import ChannelSet, SystemParams, dbm_to_watts, generate_channels, watts_to_dbm
from .outer import GridConfig, OuterResult, maximize_over_t, t_lower_bound
from .recovery import RecoveryReport, check_proposition1, extract_rank_one, gaussian_randomization

__version__ = "0.1.0"

__all__ = [
    "ChannelSet", "ConicProgram", "ExperimentConfig", "GridConfig", "InstanceResult", "OuterResult",
    "RecoveryReport", "StandardForm", "SweepRow", "SystemParams", "TransmitDesign", "achievable_secrecy_rate",
    "check_proposition1", "dbm_to_watts", "energy_feasibility", "eve_rate_exact", "eve_rate_upper",
    "extract_rank_one", "gaussian_randomization", "generate_channels", "get_backend", "maximize_over_t",
    "problem_residuals", "recover_design", "solve_inner", "solve_instance", "sweep_energy", "sweep_power",
    "t_lower_bound", "user_rate", "watts_to_dbm", "__version__",
]
