"""Qubit-efficient LABS solving with Pauli correlation encoding.

The package splits into exact sequence arithmetic (``labs_core``), Pauli
set machinery (``pauli_algebra``), a small statevector simulator
(``state_sim``), the variational solver (``pce_solver``), classical
baselines (``baselines``), and benchmarking plus scaling fits (``bench``).
"""

from pcelabs.labs_core import (
    autocorrelations,
    canonicalize,
    energy_report,
    expand_skew_symmetric,
    format_sequence,
    merit_factor,
    parse_sequence,
    sidelobe_energy,
)

__all__ = [
    "autocorrelations",
    "canonicalize",
    "energy_report",
    "expand_skew_symmetric",
    "format_sequence",
    "merit_factor",
    "parse_sequence",
    "sidelobe_energy",
]

__version__ = "0.1.0"
