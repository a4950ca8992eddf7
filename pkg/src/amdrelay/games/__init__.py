"""Security games, built-in adversaries and the relay-to-sharing reductions."""

from .adversaries import ADVERSARY_NAMES, Adversary, adversaries_for, make_adversary
from .core import (
    DYNAMIC,
    FORGE_RELAY,
    GAMES,
    IND_RELAY,
    IND_SSS,
    SHIFT_ROBUST,
    STATIC,
    OracleMisuse,
    RelaySetting,
    Trial,
    amd_delta,
    forge_relay_trial,
    ind_relay_trial,
    ind_sss_trial,
    run_forge_relay,
    run_ind_relay,
    run_ind_sss,
    run_shift_robust,
    scheme_delta,
    shift_robust_trial,
)
from .reductions import coupled_trials, reduce_forge_to_shift, reduce_ind_to_sss
from .report import GameReport, wilson_interval

__all__ = [
    "ADVERSARY_NAMES", "Adversary", "adversaries_for", "make_adversary",
    "DYNAMIC", "STATIC", "GAMES", "IND_SSS", "SHIFT_ROBUST", "IND_RELAY", "FORGE_RELAY",
    "OracleMisuse", "RelaySetting", "Trial", "amd_delta", "scheme_delta",
    "ind_sss_trial", "shift_robust_trial", "ind_relay_trial", "forge_relay_trial",
    "run_ind_sss", "run_shift_robust", "run_ind_relay", "run_forge_relay",
    "coupled_trials", "reduce_ind_to_sss", "reduce_forge_to_shift",
    "GameReport", "wilson_interval",
]
