"""Gaussian quantum channels as covariance-matrix algebra.

Submodules: ``symplectic`` (phase-space linear algebra), ``states`` (Gaussian
states and entropies), ``channels`` (Gaussian channels and dilations),
``capacities`` (capacity formulas and bounds), ``eof`` (Gaussian entanglement
of formation and minimal output entropy), ``additivity`` (residual scans),
``fock`` (truncated Fock-space oracle), ``verify`` (oracle cross-checks) and
``cli``.
"""

from .capacities import CapacityReport, capacity_reports
from .channels import (
    GaussianChannel,
    amplifier,
    apply,
    classical_noise,
    compose,
    dilate,
    fiber,
    lossy,
    tensor,
    thermal_noise,
)
from .eof import EoFError, EoFResult, gaussian_eof, gaussian_min_output_entropy, msw_capacity
from .states import (
    Bipartition,
    GaussianState,
    conditional_entropy,
    g_function,
    purify,
    renyi_entropy,
    squeezed_vacuum,
    thermal_state,
    two_mode_squeezed_state,
    vacuum,
    von_neumann_entropy,
)
from .symplectic import symplectic_eigenvalues, symplectic_form, williamson

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "CapacityReport",
    "EoFError",
    "EoFResult",
    "GaussianChannel",
    "GaussianState",
    "amplifier",
    "apply",
    "capacity_reports",
    "classical_noise",
    "compose",
    "conditional_entropy",
    "dilate",
    "fiber",
    "g_function",
    "gaussian_eof",
    "gaussian_min_output_entropy",
    "lossy",
    "msw_capacity",
    "purify",
    "renyi_entropy",
    "squeezed_vacuum",
    "symplectic_eigenvalues",
    "symplectic_form",
    "tensor",
    "thermal_noise",
    "thermal_state",
    "two_mode_squeezed_state",
    "vacuum",
    "von_neumann_entropy",
    "williamson",
]
