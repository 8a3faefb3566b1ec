"""Cross-checks of the covariance-matrix formulas against the Fock-basis oracle."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import fock
from . import symplectic as sp
from .capacities import mutual_information
from .channels import apply, lossy
from .states import (
    Bipartition,
    conditional_entropy,
    squeezed_vacuum,
    thermal_state,
    two_mode_squeezed_state,
    von_neumann_entropy,
)

SUITES = ("entropy", "channels", "extremality")
ENTROPY_TOL = 1e-6
MOMENT_TOL = 1e-6
EXTREMALITY_TOL = 1e-6
MIXTURE_MOMENT_TOL = 1e-5


@dataclass
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float
    passed: bool
    count: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


def _check(name: str, deviations, tol: float) -> CheckResult:
    deviations = [float(d) for d in deviations]
    worst = max(deviations)
    return CheckResult(name, worst, tol, bool(worst <= tol), len(deviations))


def entropy_suite(cutoff: int = 200) -> list[CheckResult]:
    """Fock eigenvalue entropies vs symplectic-spectrum entropies."""
    two_cut = min(cutoff, fock.MAX_TWO_MODE_CUTOFF)
    out = []

    devs = []
    for N in (0.1, 0.5, 1.0, 2.0):
        rho = fock.thermal_fock(N, cutoff)
        devs.append(abs(fock.fock_entropy(rho) - von_neumann_entropy(thermal_state(N))))
    out.append(_check("thermal entropy", devs, ENTROPY_TOL))

    devs = []
    for N in (0.5, 1.0, 2.0):
        rho = fock.thermal_fock(N, cutoff)
        c = 2 * N + 1
        devs.append(abs(fock.fock_entropy(rho, 2.0) - math.log2(c)))
    out.append(_check("thermal Renyi-2 entropy", devs, ENTROPY_TOL))

    devs = []
    for r in (0.2, 0.5, 1.0):
        rho = fock.squeezed_vacuum_fock(r, cutoff)
        devs.append(abs(fock.fock_entropy(rho) - von_neumann_entropy(squeezed_vacuum(r))))
        devs.append(float(np.max(np.abs(fock.fock_covariance(rho) - squeezed_vacuum(r).gamma))))
    out.append(_check("squeezed vacuum entropy and covariance", devs, ENTROPY_TOL))

    devs = []
    for r in (0.2, 0.5, 1.0):
        rho = fock.two_mode_squeezed_fock(r, two_cut)
        tms = two_mode_squeezed_state(r)
        half = fock.fock_partial_trace(rho, [0])
        devs.append(abs(fock.fock_entropy(rho) - von_neumann_entropy(tms)))
        devs.append(abs(fock.fock_entropy(half) - von_neumann_entropy(tms.reduce([0]))))
    out.append(_check("two-mode squeezed entropies", devs, ENTROPY_TOL))
    return out


def channels_suite(cutoff: int = 120) -> list[CheckResult]:
    """Kraus-form attenuation vs the covariance-level lossy channel."""
    inputs = [
        ("thermal", thermal_state(1.0).gamma, None, fock.thermal_fock(1.0, cutoff)),
        ("coherent", np.eye(2), np.array([1.2, -0.7]), fock.coherent_fock([1.2, -0.7], cutoff)),
        ("squeezed", squeezed_vacuum(0.4, 0.3).gamma, None, fock.squeezed_vacuum_fock(0.4, cutoff, 0.3)),
    ]
    cov_devs, mean_devs = [], []
    for eta in (0.2, 0.5, 0.9):
        T = lossy(eta)
        for _, gamma, d, rho in inputs:
            out = fock.apply_lossy_fock(rho, eta)
            g_out, d_out = fock.fock_moments(out)
            cov_devs.append(np.max(np.abs(g_out - apply(T, gamma))))
            d = np.zeros(2) if d is None else d
            mean_devs.append(np.max(np.abs(d_out - math.sqrt(eta) * d)))
    thinning = []
    for eta in (0.5,):
        out = fock.apply_lossy_fock(fock.thermal_fock(1.0, cutoff), eta)
        ref = fock.thermal_fock(eta * 1.0, cutoff)
        thinning.append(np.max(np.abs(out.matrix - ref.matrix)))
    return [
        _check("lossy output covariance", cov_devs, MOMENT_TOL),
        _check("lossy output displacement", mean_devs, MOMENT_TOL),
        _check("binomial thinning of thermal light", thinning, 1e-8),
    ]


def _extremality_target(rng: np.random.Generator, n: int) -> np.ndarray:
    # noisy enough to leave room for well-separated mixture components,
    # small enough for the two-mode oracle at cutoff 30
    return sp.random_covariance(n, rng, max_squeezing=0.3, max_thermal=1.5 if n == 1 else 0.8)


def extremality_suite(seeds: int = 50, cutoff: int = 30, seed: int = 0, eta: float = 0.6) -> list[CheckResult]:
    """Gaussian states versus non-Gaussian states with identical moments.

    Per seed: a one-mode target tests entropy and lossy-channel mutual
    information; a two-mode target tests entropy and both readings of the
    conditional entropy. Deviations are ``oracle - gaussian`` (must stay below
    the tolerance); moment mismatches of the mixtures are reported as well.
    """
    cutoff1 = max(cutoff, 60)
    cutoff2 = min(cutoff, fock.MAX_TWO_MODE_CUTOFF)
    ent, cond, mi, moments = [], [], [], []
    p = Bipartition((0,), (1,))
    T = lossy(eta)
    for k in range(seeds):
        rng = np.random.default_rng([seed, k])

        g1 = _extremality_target(rng, 1)
        rho1 = fock.same_covariance_non_gaussian(g1, int(rng.integers(2**31)), cutoff1)
        moments.append(np.max(np.abs(fock.fock_covariance(rho1) - g1)))
        ent.append(fock.fock_entropy(rho1) - von_neumann_entropy(g1))
        mi.append(fock.lossy_mutual_information_fock(rho1, eta) - mutual_information(T, g1))

        g2 = _extremality_target(rng, 2)
        rho2 = fock.same_covariance_non_gaussian(g2, int(rng.integers(2**31)), cutoff2)
        moments.append(np.max(np.abs(fock.fock_covariance(rho2) - g2)))
        s_joint = fock.fock_entropy(rho2)
        ent.append(s_joint - von_neumann_entropy(g2))
        for part in (p, p.swapped()):
            s_a = fock.fock_entropy(fock.fock_partial_trace(rho2, list(part.modes_a)))
            cond.append((s_joint - s_a) - conditional_entropy(g2, part))
    return [
        _check("mixture second moments", moments, MIXTURE_MOMENT_TOL),
        _check("entropy extremality", ent, EXTREMALITY_TOL),
        _check("conditional entropy extremality", cond, EXTREMALITY_TOL),
        _check("mutual information extremality", mi, EXTREMALITY_TOL),
    ]


def run_suite(name: str, cutoff: int, seeds: int = 50, seed: int = 0) -> list[CheckResult]:
    if name == "entropy":
        return entropy_suite(cutoff)
    if name == "channels":
        return channels_suite(cutoff)
    if name == "extremality":
        return extremality_suite(seeds, cutoff, seed)
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
