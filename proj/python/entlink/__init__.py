"""Photon-count channel simulator for polarization-entangled pairs.

Thin Python surface over the C++ core: deterministic Monte Carlo channel
estimates, exact error-rate formulas for the composition amplifiers, and
no-signaling tests comparing the receiver's count distributions across the
two sender settings.
"""

from ._core import (
    Stream,
    __version__,
    capacity_blahut_arimoto,
    chsh,
    correlation,
    default_threshold,
    exact_ber,
    exact_signal1_error,
    mutual_information,
    no_signaling,
    pair_events,
    philox_block,
    simulate,
    snr_formula,
    sweep,
    trial_records,
    urn_pmf,
)

__all__ = [
    "Stream",
    "__version__",
    "capacity_blahut_arimoto",
    "chsh",
    "correlation",
    "default_threshold",
    "exact_ber",
    "exact_signal1_error",
    "mutual_information",
    "no_signaling",
    "pair_events",
    "philox_block",
    "simulate",
    "snr_formula",
    "sweep",
    "trial_records",
    "urn_pmf",
]
