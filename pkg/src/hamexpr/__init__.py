"""Hamiltonian expressibility of parametrized quantum circuits.

Modules:

- ``qcore``: gates, states, Haar sampling and the statevector simulator
- ``circuits``: circuit templates, the bundled catalog and device topologies
- ``hamiltonians``: problem Hamiltonians, spectra and ground-state classification
- ``expressibility``: Monte Carlo frame potentials and the expressibility metrics
- ``noise``: the four-parameter noise model, error rate and density-matrix execution
- ``vqe``: shot-based VQE and the approximation ratio
- ``analysis``: correlation coefficients, mutual information, class aggregation
- ``cli``: the ``hamexpr`` command
"""

__version__ = "0.1.0"

from .circuits import CircuitTemplate, GateOp, Topology, build_template, decompose_to_native  # noqa: E402
from .expressibility import (  # noqa: E402
    ExpressibilityResult,
    FramePotentialEstimate,
    HaarThreshold,
    adjusted_metrics,
    estimate_frame_potential,
    expressibility,
    haar_frame_potential,
    haar_thresholds,
)
from .hamiltonians import Hamiltonian, ProblemClass  # noqa: E402
from .noise import NoiseModel, error_rate  # noqa: E402
from .vqe import VqeConfig, approximation_ratio, run_experiment  # noqa: E402

__all__ = [
    "CircuitTemplate",
    "GateOp",
    "Topology",
    "build_template",
    "decompose_to_native",
    "ExpressibilityResult",
    "FramePotentialEstimate",
    "HaarThreshold",
    "adjusted_metrics",
    "estimate_frame_potential",
    "expressibility",
    "haar_frame_potential",
    "haar_thresholds",
    "Hamiltonian",
    "ProblemClass",
    "NoiseModel",
    "error_rate",
    "VqeConfig",
    "approximation_ratio",
    "run_experiment",
]
