"""Sum rates, energy-efficient power control and power-control games for the
symmetric 3-user multi-way relay channel."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ALL_SCHEMES,
    BracketFailure,
    DegenerateRegion,
    InnerSolverFailure,
    MwrcError,
    NonConvergenceError,
    PowerLimits,
    Scheme,
    SymmetricChannel,
    UnsupportedScheme,
    capacity,
    linear_to_db,
    snr_db_to_linear,
)
from .fractional import alternating_gee2, dinkelbach, maximize_gee1  # noqa: E402
from .game import GameSpec, br_relay, br_sources, brd, is_nash  # noqa: E402
from .gee import PowerCost, PowerProfile, gee_value, params_for  # noqa: E402
from .monotonic import gee2_global  # noqa: E402
from .power_model import LinkBudget, scheme_power_profile  # noqa: E402
from .rates import sum_rate  # noqa: E402

__all__ = [
    "ALL_SCHEMES", "BracketFailure", "DegenerateRegion", "GameSpec", "InnerSolverFailure",
    "LinkBudget", "MwrcError", "NonConvergenceError", "PowerCost", "PowerLimits", "PowerProfile",
    "Scheme", "SymmetricChannel", "UnsupportedScheme", "alternating_gee2", "br_relay", "br_sources",
    "brd", "capacity", "dinkelbach", "gee2_global", "gee_value", "is_nash", "linear_to_db",
    "maximize_gee1", "params_for", "scheme_power_profile", "snr_db_to_linear", "sum_rate",
]
