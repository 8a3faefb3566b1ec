"""Gaussian states and their entropic functionals (all entropies in bits)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import symplectic as sp

_Z = np.diag([1.0, -1.0])


@dataclass(frozen=True)
class GaussianState:
    """Covariance matrix plus displacement vector.

    Displacements are carried along for bookkeeping only; no entropy
    depends on them.
    """

    gamma: np.ndarray
    d: np.ndarray = field(default=None)

    def __post_init__(self):
        gamma = sp.require_covariance(self.gamma)
        d = np.zeros(gamma.shape[0]) if self.d is None else np.asarray(self.d, dtype=float)
        if d.shape != (gamma.shape[0],):
            raise ValueError(f"displacement must have length {gamma.shape[0]}, got {d.shape}")
        gamma.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.gamma.shape[0] // 2

    def reduce(self, keep: Sequence[int]) -> "GaussianState":
        idx = sp.quadrature_indices(keep, self.n)
        return GaussianState(sp.partial_trace(self.gamma, keep), self.d[idx])

    def mean_photon_number(self) -> float:
        return float((np.trace(self.gamma) + self.d @ self.d) / 4.0 - self.n / 2.0)


StateLike = Union[GaussianState, np.ndarray]


def as_covariance(s: StateLike) -> np.ndarray:
    if isinstance(s, GaussianState):
        return np.asarray(s.gamma)
    return sp.require_covariance(s)


@dataclass(frozen=True)
class Bipartition:
    """Disjoint, exhaustive split of ``n`` modes into parts A and B."""

    modes_a: tuple
    modes_b: tuple

    def __post_init__(self):
        a = tuple(int(m) for m in self.modes_a)
        b = tuple(int(m) for m in self.modes_b)
        if not a or not b:
            raise ValueError("both parts of a bipartition must be nonempty")
        if set(a) & set(b):
            raise ValueError(f"parts overlap: {sorted(set(a) & set(b))}")
        if sorted(a + b) != list(range(len(a) + len(b))):
            raise ValueError(f"parts {a} | {b} do not cover modes 0..{len(a) + len(b) - 1}")
        object.__setattr__(self, "modes_a", a)
        object.__setattr__(self, "modes_b", b)

    @property
    def n(self) -> int:
        return len(self.modes_a) + len(self.modes_b)

    def swapped(self) -> "Bipartition":
        return Bipartition(self.modes_b, self.modes_a)

    def check(self, n: int) -> None:
        if self.n != n:
            raise ValueError(f"bipartition covers {self.n} modes, state has {n}")

    @classmethod
    def parse(cls, spec: str) -> "Bipartition":
        """Parse ``"0,1|2,3"`` (0-based mode indices)."""
        try:
            left, right = spec.split("|")
            return cls(
                tuple(int(t) for t in left.split(",") if t.strip()),
                tuple(int(t) for t in right.split(",") if t.strip()),
            )
        except ValueError as exc:
            raise ValueError(f"bad partition spec {spec!r}: {exc}") from None

    def __str__(self) -> str:
        return ",".join(map(str, self.modes_a)) + "|" + ",".join(map(str, self.modes_b))


# --- constructors --------------------------------------------------------


def vacuum(n: int = 1) -> GaussianState:
    return GaussianState(np.eye(2 * n))


def thermal_state(N: float) -> GaussianState:
    """Gibbs state with mean photon number ``N``, covariance ``(2N+1) I``."""
    if N < 0:
        raise ValueError(f"mean photon number must be nonnegative, got {N}")
    return GaussianState((2.0 * N + 1.0) * np.eye(2))


def coherent_state(d) -> GaussianState:
    d = np.asarray(d, dtype=float)
    if d.shape != (2,) or not np.all(np.isfinite(d)):
        raise ValueError("coherent displacement must be a finite length-2 vector")
    return GaussianState(np.eye(2), d)


def squeezed_vacuum(r: float, phi: float = 0.0) -> GaussianState:
    """Squeezed vacuum with covariance ``R diag(e^{-2r}, e^{2r}) R^T``."""
    R = sp.rotation(phi)
    return GaussianState(R @ np.diag([np.exp(-2 * r), np.exp(2 * r)]) @ R.T)


def two_mode_squeezed_state(r: float) -> GaussianState:
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    I2 = np.eye(2)
    return GaussianState(np.block([[ch * I2, sh * _Z], [sh * _Z, ch * I2]]))


# --- entropies -----------------------------------------------------------


def g_function(N: float) -> float:
    """Entropy in bits of a thermal state with mean photon number ``N``."""
    if N < 0:
        raise ValueError(f"g(N) needs N >= 0, got {N}")
    if N == 0:
        return 0.0
    if N < 1e-12:
        return (N - N * math.log(N)) / math.log(2)
    return ((N + 1.0) * math.log1p(N) - N * math.log(N)) / math.log(2)


def _occupation(c: float, tol: float = 1e-8) -> float:
    # symplectic eigenvalues may dip below 1 by eigensolver noise
    if c < 1.0 - tol:
        raise ValueError(f"symplectic eigenvalue {c} < 1")
    return max(0.0, 0.5 * (c - 1.0))


def entropy_from_spectrum(spectrum) -> float:
    return float(sum(g_function(_occupation(c)) for c in spectrum))


def von_neumann_entropy(s: StateLike) -> float:
    return entropy_from_spectrum(sp.symplectic_eigenvalues(as_covariance(s)))


def renyi_from_spectrum(spectrum, alpha: float) -> float:
    if alpha <= 0 or alpha == 1:
        raise ValueError(f"Renyi order must be positive and != 1, got {alpha}")
    total = 0.0
    for c in spectrum:
        N = _occupation(c)
        # log2[(N+1)^a - N^a] without overflow for large N
        if N == 0.0:
            continue
        log_term = alpha * math.log2(N + 1.0) + math.log2(-math.expm1(alpha * math.log(N / (N + 1.0))))
        total += log_term / (alpha - 1.0)
    return total


def renyi_entropy(s: StateLike, alpha: float) -> float:
    """Renyi-``alpha`` entropy ``log2(tr rho^alpha) / (1 - alpha)``."""
    return renyi_from_spectrum(sp.symplectic_eigenvalues(as_covariance(s)), alpha)


def conditional_entropy(s: StateLike, p: Bipartition) -> float:
    """``S(rho) - S(rho_A)`` with ``rho_A`` the reduction onto part A.

    Use ``p.swapped()`` for the reading that subtracts ``S(rho_B)``.
    """
    gamma = as_covariance(s)
    p.check(gamma.shape[0] // 2)
    return von_neumann_entropy(gamma) - von_neumann_entropy(sp.partial_trace(gamma, p.modes_a))


def distillable_lower_bound(s: StateLike, p: Bipartition) -> float:
    """``S(rho_A) - S(rho)``; nonpositive values certify nothing."""
    return -conditional_entropy(s, p)


def purify(s: StateLike) -> tuple[GaussianState, Bipartition]:
    """Pure state on ``2n`` modes whose first ``n`` modes reduce to ``s``.

    Each normal mode with symplectic eigenvalue ``c`` is paired with an
    ancilla through a two-mode squeezed state with ``cosh 2r = c``.
    """
    if isinstance(s, GaussianState):
        gamma, d = np.asarray(s.gamma), np.asarray(s.d)
    else:
        gamma = sp.require_covariance(s)
        d = np.zeros(gamma.shape[0])
    n = gamma.shape[0] // 2
    wd = sp.williamson(gamma)

    big = np.zeros((4 * n, 4 * n))
    for k, c in enumerate(wd.spectrum):
        c = max(c, 1.0)
        sh = math.sqrt(c * c - 1.0)
        i = sp.quadrature_indices([k], 2 * n)
        j = sp.quadrature_indices([n + k], 2 * n)
        big[np.ix_(i, i)] = c * np.eye(2)
        big[np.ix_(j, j)] = c * np.eye(2)
        big[np.ix_(i, j)] = sh * _Z
        big[np.ix_(j, i)] = sh * _Z
    S = sp.direct_sum(wd.S, np.eye(2 * n))
    pure = S @ big @ S.T
    pure = 0.5 * (pure + pure.T)
    state = GaussianState(pure, np.concatenate([d, np.zeros(2 * n)]))
    return state, Bipartition(tuple(range(n)), tuple(range(n, 2 * n)))
