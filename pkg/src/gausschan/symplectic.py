"""Phase-space linear algebra for n bosonic modes.

Quadratures are ordered ``(x_1, p_1, ..., x_n, p_n)`` and the vacuum has
the identity as covariance matrix.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as la

DEFAULT_TOL = 1e-9

_OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])
_Z = np.diag([1.0, -1.0])


class WilliamsonDecomposition(NamedTuple):
    """``gamma == S @ diag(c_1, c_1, ..., c_n, c_n) @ S.T`` with S symplectic."""

    S: np.ndarray
    spectrum: np.ndarray

    def normal_form(self) -> np.ndarray:
        return np.diag(np.repeat(self.spectrum, 2))

    def reconstruct(self) -> np.ndarray:
        return self.S @ self.normal_form() @ self.S.T


def symplectic_form(n: int) -> np.ndarray:
    """Block-diagonal symplectic form ``sigma`` on ``n`` modes.

    Examples
    --------
    >>> symplectic_form(1)
    array([[ 0.,  1.],
           [-1.,  0.]])
    """
    if int(n) != n or n < 1:
        raise ValueError(f"mode count must be a positive integer, got {n!r}")
    return np.kron(np.eye(int(n)), _OMEGA)


def _check_square_even(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] == 0 or m.shape[0] % 2:
        raise ValueError(f"{name} must have even nonzero dimension, got {m.shape[0]}")
    return m


def mode_count(gamma: np.ndarray) -> int:
    return _check_square_even(gamma).shape[0] // 2


def is_valid_covariance(gamma, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``gamma`` is symmetric and ``gamma + i sigma`` is PSD up to ``tol``."""
    gamma = _check_square_even(gamma, "covariance matrix")
    if not np.all(np.isfinite(gamma)):
        return False
    if np.max(np.abs(gamma - gamma.T)) > tol:
        return False
    sigma = symplectic_form(gamma.shape[0] // 2)
    herm = 0.5 * (gamma + gamma.T) + 1j * sigma
    return bool(np.linalg.eigvalsh(herm).min() >= -tol)


def require_covariance(gamma, tol: float = DEFAULT_TOL) -> np.ndarray:
    gamma = _check_square_even(gamma, "covariance matrix")
    if not is_valid_covariance(gamma, tol):
        raise ValueError("not a valid covariance matrix (gamma + i sigma must be PSD)")
    return 0.5 * (gamma + gamma.T)


def is_symplectic(S, tol: float = 1e-10) -> bool:
    S = _check_square_even(S, "symplectic matrix")
    sigma = symplectic_form(S.shape[0] // 2)
    return bool(np.max(np.abs(S @ sigma @ S.T - sigma)) <= tol)


def symplectic_eigenvalues(gamma, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix, sorted descending.

    The eigenvalues of ``sigma @ gamma`` come in pairs ``+-i c_k``; the
    magnitudes are sorted and every second one is kept.
    """
    gamma = require_covariance(gamma, tol)
    sigma = symplectic_form(gamma.shape[0] // 2)
    mags = np.sort(np.abs(np.linalg.eigvals(sigma @ gamma)))[::-1]
    return mags[::2].copy()


def _sqrtm_psd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(m)
    if w.min() <= 0:
        raise ValueError("matrix is not strictly positive definite")
    root = (v * np.sqrt(w)) @ v.T
    inv_root = (v / np.sqrt(w)) @ v.T
    return root, inv_root


def williamson(gamma, tol: float = DEFAULT_TOL) -> WilliamsonDecomposition:
    """Williamson normal-mode decomposition of a covariance matrix.

    Uses the real Schur form of the antisymmetric matrix
    ``gamma^{-1/2} sigma gamma^{-1/2}``, which stays well conditioned when the
    symplectic spectrum is degenerate.
    """
    return _williamson_unchecked(require_covariance(gamma, tol))


def _williamson_unchecked(gamma: np.ndarray) -> WilliamsonDecomposition:
    n = gamma.shape[0] // 2
    sigma = _form_cache(n)
    root, inv_root = _sqrtm_psd(gamma)
    A = inv_root @ sigma @ inv_root
    A = 0.5 * (A - A.T)
    T, O = la.schur(A, output="real")

    inv_c = np.empty(n)
    for k in range(n):
        i, j = 2 * k, 2 * k + 1
        if T[i, j] < 0:
            O[:, [i, j]] = O[:, [j, i]]
            T[[i, j], :] = T[[j, i], :]
            T[:, [i, j]] = T[:, [j, i]]
        inv_c[k] = 0.5 * (T[i, j] - T[j, i])

    c = 1.0 / inv_c
    order = np.argsort(-c, kind="stable")
    perm = np.concatenate([[2 * k, 2 * k + 1] for k in order])
    O = O[:, perm]
    c = c[order]
    S = root @ O @ np.diag(np.repeat(1.0 / np.sqrt(c), 2))
    return WilliamsonDecomposition(S=S, spectrum=c)


@lru_cache(maxsize=None)
def _form_cache(n: int) -> np.ndarray:
    sigma = symplectic_form(n)
    sigma.setflags(write=False)
    return sigma


def is_pure(gamma, tol: float = 1e-8) -> bool:
    return bool(np.all(np.abs(symplectic_eigenvalues(gamma) - 1.0) <= tol))


# --- standard generators -------------------------------------------------


def rotation(phi: float) -> np.ndarray:
    """Single-mode phase-space rotation (passive)."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


def squeezer(r: float) -> np.ndarray:
    """Single-mode squeezer ``diag(e^{-r}, e^{r})``; on vacuum gives ``diag(e^{-2r}, e^{2r})``."""
    return np.diag([np.exp(-r), np.exp(r)])


def beam_splitter(eta: float) -> np.ndarray:
    """Two-mode beam splitter with transmittivity ``eta``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmittivity must lie in [0, 1], got {eta}")
    t, s = np.sqrt(eta), np.sqrt(1.0 - eta)
    I2 = np.eye(2)
    return np.block([[t * I2, s * I2], [-s * I2, t * I2]])


def two_mode_squeezer(r: float) -> np.ndarray:
    I2 = np.eye(2)
    return np.block(
        [[np.cosh(r) * I2, np.sinh(r) * _Z], [np.sinh(r) * _Z, np.cosh(r) * I2]]
    )


def embed(S_local: np.ndarray, modes: Sequence[int], n: int) -> np.ndarray:
    """Embed a symplectic matrix acting on ``modes`` into ``n`` modes (identity elsewhere)."""
    idx = quadrature_indices(modes, n)
    S = np.eye(2 * n)
    S[np.ix_(idx, idx)] = S_local
    return S


# --- block operations ----------------------------------------------------


def quadrature_indices(modes: Sequence[int], n: int) -> np.ndarray:
    modes = list(modes)
    if not modes:
        raise ValueError("mode index set must be nonempty")
    if len(set(modes)) != len(modes):
        raise ValueError(f"repeated mode index in {modes}")
    for m in modes:
        if int(m) != m or not 0 <= m < n:
            raise ValueError(f"mode index {m} out of range for {n} modes")
    return np.array([q for m in modes for q in (2 * int(m), 2 * int(m) + 1)], dtype=int)


def partial_trace(gamma, keep: Sequence[int]) -> np.ndarray:
    """Reduced covariance matrix on the modes in ``keep`` (a principal submatrix)."""
    gamma = _check_square_even(gamma, "covariance matrix")
    idx = quadrature_indices(keep, gamma.shape[0] // 2)
    return gamma[np.ix_(idx, idx)].copy()


def direct_sum(*blocks) -> np.ndarray:
    for b in blocks:
        _check_square_even(b)
    return la.block_diag(*[np.asarray(b, dtype=float) for b in blocks])


# --- random sampling (tests and scans) -----------------------------------


def random_passive(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthogonal symplectic matrix on ``n`` modes."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    return unitary_to_symplectic(u)


def unitary_to_symplectic(u: np.ndarray) -> np.ndarray:
    """Orthogonal symplectic matrix of the passive map ``a -> u a`` (interleaved order)."""
    n = u.shape[0]
    re, im = u.real, u.imag
    S = np.empty((2 * n, 2 * n))
    S[0::2, 0::2] = re
    S[0::2, 1::2] = -im
    S[1::2, 0::2] = im
    S[1::2, 1::2] = re
    return S


def random_symplectic(n: int, rng: np.random.Generator, max_squeezing: float = 1.0) -> np.ndarray:
    """Random symplectic matrix ``O1 Z O2`` with squeezings up to ``max_squeezing``."""
    z = rng.uniform(-max_squeezing, max_squeezing, size=n)
    Z = np.diag(np.exp(np.repeat(z, 2) * np.tile([-1.0, 1.0], n)))
    return random_passive(n, rng) @ Z @ random_passive(n, rng)


def random_covariance(
    n: int,
    rng: np.random.Generator,
    max_squeezing: float = 1.0,
    max_thermal: float = 3.0,
) -> np.ndarray:
    """Random valid covariance ``S diag(c) S^T`` with ``c`` in ``[1, 1 + max_thermal]``."""
    c = 1.0 + rng.uniform(0.0, max_thermal, size=n)
    S = random_symplectic(n, rng, max_squeezing)
    gamma = S @ np.diag(np.repeat(c, 2)) @ S.T
    return 0.5 * (gamma + gamma.T)
