"""Quantum root-mean-square errors for finite-dimensional measurements.

Noise-operator q-rms error, its error profile along the orbit generated by
the measured observable, the locally uniform (sound and complete) error,
the three-state decomposition into measurable expectation values, and a
counting-statistics simulator for the spin-1/2 polarimetry example.
"""

from .errors import (
    ErrorProfile,
    check_requirements,
    classical_rms_commuting,
    eps_bar,
    eps_no,
    eps_profile_at,
    error_profile,
    profile,
)
from .linalg import evolve, expectation, matrix_sqrt_psd, spectral_decompose
from .polarimeter import BeamConfig, run_experiment, simulate_projector, simulate_randomized_povm
from .povm import (
    Dilation,
    InvalidPovmError,
    Povm,
    is_accurate,
    is_projective,
    moment,
    naimark_dilate,
    outcome_distribution,
    pi1_sharp,
    pi2_unsharp,
    second_moment,
    sharp_from_observable,
)
from .threestate import TermDecomposition, assemble, decompose, example_plan, symmetrization_identity_check

__all__ = [
    "BeamConfig",
    "Dilation",
    "ErrorProfile",
    "InvalidPovmError",
    "Povm",
    "TermDecomposition",
    "assemble",
    "check_requirements",
    "classical_rms_commuting",
    "decompose",
    "eps_bar",
    "eps_no",
    "eps_profile_at",
    "error_profile",
    "evolve",
    "example_plan",
    "expectation",
    "is_accurate",
    "is_projective",
    "matrix_sqrt_psd",
    "moment",
    "naimark_dilate",
    "outcome_distribution",
    "pi1_sharp",
    "pi2_unsharp",
    "profile",
    "run_experiment",
    "second_moment",
    "sharp_from_observable",
    "simulate_projector",
    "simulate_randomized_povm",
    "spectral_decompose",
    "symmetrization_identity_check",
]

__version__ = "0.1.0"
