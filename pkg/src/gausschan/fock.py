"""Truncated number-basis oracle for cross-checking the covariance-matrix formulas.

Everything here works directly with density matrices in the Fock basis and
shares no code path with the symplectic-spectrum entropies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from . import symplectic as sp

DEFICIT_BUDGET = 1e-8
MAX_TWO_MODE_CUTOFF = 40
EIG_FLOOR = 1e-14


class TruncationError(ValueError):
    """The requested state carries more weight above the cutoff than allowed."""


@dataclass
class FockDensityMatrix:
    matrix: np.ndarray
    cutoff: int
    modes: int
    trace_deficit: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dim = self.cutoff**self.modes
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got {self.matrix.shape}")

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def is_valid(self, tol: float = 1e-10, budget: float = DEFICIT_BUDGET) -> bool:
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > tol:
            return False
        if np.linalg.eigvalsh(self.matrix).min() < -tol:
            return False
        return 1.0 - budget - tol <= self.trace <= 1.0 + tol

    def tensor_shape(self):
        return (self.cutoff,) * (2 * self.modes)


def lowering(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1)


def _check_cutoff(cutoff: int, modes: int = 1) -> None:
    if cutoff < 2:
        raise ValueError(f"cutoff must be >= 2, got {cutoff}")
    if modes == 2 and cutoff > MAX_TWO_MODE_CUTOFF:
        raise ValueError(f"two-mode cutoff capped at {MAX_TWO_MODE_CUTOFF}, got {cutoff}")
    if modes > 2:
        raise ValueError("the oracle handles at most two modes")


def _finish(matrix, cutoff, modes, budget, **meta) -> FockDensityMatrix:
    matrix = 0.5 * (matrix + matrix.conj().T)
    deficit = max(0.0, 1.0 - float(np.trace(matrix).real))
    if deficit > budget:
        raise TruncationError(f"trace deficit {deficit:.3g} exceeds budget {budget:.3g}; increase the cutoff")
    return FockDensityMatrix(matrix, cutoff, modes, deficit, meta)


# --- closed-form states --------------------------------------------------


def thermal_fock(N: float, cutoff: int, budget: float = DEFICIT_BUDGET) -> FockDensityMatrix:
    _check_cutoff(cutoff)
    if N < 0:
        raise ValueError("mean photon number must be nonnegative")
    q = N / (N + 1.0)
    p = (1.0 / (N + 1.0)) * q ** np.arange(cutoff)
    return _finish(np.diag(p).astype(complex), cutoff, 1, budget, kind="thermal", N=N)


def _pure(psi: np.ndarray, cutoff: int, modes: int, budget: float, **meta) -> FockDensityMatrix:
    return _finish(np.outer(psi, psi.conj()), cutoff, modes, budget, **meta)


def coherent_fock(d, cutoff: int, budget: float = DEFICIT_BUDGET) -> FockDensityMatrix:
    """Coherent state with quadrature displacement ``d = (<x>, <p>)``."""
    _check_cutoff(cutoff)
    d = np.asarray(d, dtype=float)
    alpha = (d[0] + 1j * d[1]) / math.sqrt(2.0)
    n = np.arange(cutoff)
    if alpha == 0:
        psi = (n == 0).astype(complex)
    else:
        log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        psi = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return _pure(psi, cutoff, 1, budget, kind="coherent", d=d.tolist())


def squeezed_vacuum_fock(r: float, cutoff: int, phi: float = 0.0, budget: float = DEFICIT_BUDGET) -> FockDensityMatrix:
    """Squeezed vacuum whose covariance is ``R(phi) diag(e^{-2r}, e^{2r}) R(phi)^T``."""
    _check_cutoff(cutoff)
    psi = np.zeros(cutoff, dtype=complex)
    m = np.arange((cutoff + 1) // 2)
    t = math.tanh(abs(r))
    with np.errstate(divide="ignore"):
        log_mag = m * np.log(t) + 0.5 * gammaln(2 * m + 1) - m * math.log(2.0) - gammaln(m + 1)
    log_mag -= 0.5 * math.log(math.cosh(r))
    mag = np.exp(log_mag) if t > 0 else (m == 0).astype(float)
    phase = (-np.sign(r) * np.exp(-2j * phi)) ** m
    psi[0::2] = mag * phase
    return _pure(psi, cutoff, 1, budget, kind="squeezed_vacuum", r=r, phi=phi)


def two_mode_squeezed_fock(r: float, cutoff: int, budget: float = DEFICIT_BUDGET) -> FockDensityMatrix:
    """``sum_n tanh^n r / cosh r |n, n>``; mode 0 is the most significant index."""
    _check_cutoff(cutoff, 2)
    psi = np.zeros((cutoff, cutoff), dtype=complex)
    n = np.arange(cutoff)
    psi[n, n] = np.tanh(r) ** n / np.cosh(r)
    return _pure(psi.ravel(), cutoff, 2, budget, kind="two_mode_squeezed", r=r)


def gaussian_to_fock(kind: str, cutoff: int, budget: float = DEFICIT_BUDGET, **params) -> FockDensityMatrix:
    """Closed-form Fock representation of the named Gaussian families."""
    if kind == "thermal":
        return thermal_fock(params["N"], cutoff, budget)
    if kind == "coherent":
        return coherent_fock(params["d"], cutoff, budget)
    if kind == "squeezed_vacuum":
        return squeezed_vacuum_fock(params["r"], cutoff, params.get("phi", 0.0), budget)
    if kind == "two_mode_squeezed":
        return two_mode_squeezed_fock(params["r"], cutoff, budget)
    raise ValueError(f"unknown Gaussian family {kind!r}")


# --- general Gaussian states by recurrence -------------------------------


def _xpxp_to_xxpp(n: int) -> np.ndarray:
    return np.concatenate([np.arange(0, 2 * n, 2), np.arange(1, 2 * n, 2)])


def _bargmann_data(gamma: np.ndarray, d: np.ndarray):
    """Quadratic form ``A``, linear term ``b`` and prefactor of the generating function
    ``F(z, w) = sum_mn rho_mn z^m w^n / sqrt(m! n!)``, variables ordered (ket z, bra w).

    Follows from ``<v|rho|v> = exp(-(nu - beta)^H Sigma^{-1} (nu - beta) / 2) / sqrt(det Sigma)``
    with ``nu = (v, conj v)`` and ``Sigma`` the anti-normally ordered covariance.
    """
    n = gamma.shape[0] // 2
    perm = _xpxp_to_xxpp(n)
    g = gamma[np.ix_(perm, perm)]
    x, xp, p = g[:n, :n], g[:n, n:], g[n:, n:]
    I = np.eye(n)
    adag_a = (x + p + 1j * (xp - xp.T) - 2 * I) / 4  # <a_i^dag a_j>
    a_a = (x - p + 1j * (xp + xp.T)) / 4  # <a_i a_j>
    Sigma = np.block([[adag_a.T + I, a_a], [a_a.conj(), adag_a + I]])
    P = np.linalg.inv(Sigma)
    Xm = np.block([[np.zeros((n, n)), I], [I, np.zeros((n, n))]])
    A = (np.eye(2 * n) - P) @ Xm
    alpha = (d[0::2] + 1j * d[1::2]) / math.sqrt(2.0)
    beta = np.concatenate([alpha, alpha.conj()])
    b = P @ beta
    pref = np.exp(-0.5 * beta.conj() @ P @ beta) / np.sqrt(np.linalg.det(Sigma))
    return 0.5 * (A + A.T), b, complex(pref)


def _shift(arr: np.ndarray, axis: int) -> np.ndarray:
    """``out[..., k, ...] = sqrt(k) * arr[..., k-1, ...]`` along ``axis``."""
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    src[axis] = slice(0, arr.shape[axis] - 1)
    dst[axis] = slice(1, None)
    shape = [1] * arr.ndim
    shape[axis] = arr.shape[axis] - 1
    out[tuple(dst)] = arr[tuple(src)] * np.sqrt(np.arange(1, arr.shape[axis])).reshape(shape)
    return out


def _recurrence(A: np.ndarray, b: np.ndarray, pref: complex, cutoff: int) -> np.ndarray:
    """Coefficients ``G(k)`` of ``pref * exp(x^T A x / 2 + b^T x)`` in the basis ``x^k / sqrt(k!)``."""
    D = len(b)
    G = np.zeros((cutoff,) * D, dtype=complex)
    G[(0,) * D] = pref
    for ax in range(D):
        # fill the slab where axes > ax are zero, one level of axis ``ax`` at a time
        base = [slice(None)] * (ax) + [0] * (D - ax)
        for t in range(cutoff - 1):
            cur = list(base)
            cur[ax] = t
            cur_slab = G[tuple(cur)]
            acc = b[ax] * cur_slab
            if t > 0:
                prev = list(base)
                prev[ax] = t - 1
                acc = acc + A[ax, ax] * math.sqrt(t) * G[tuple(prev)]
            for j in range(ax):
                if A[ax, j] != 0:
                    acc = acc + A[ax, j] * _shift(cur_slab, j)
            nxt = list(base)
            nxt[ax] = t + 1
            G[tuple(nxt)] = acc / math.sqrt(t + 1)
    return G


def gaussian_state_fock(gamma, d=None, cutoff: int = 30, budget: float = DEFICIT_BUDGET) -> FockDensityMatrix:
    """Fock representation of an arbitrary one- or two-mode Gaussian state.

    Matrix elements are generated exactly (no truncation of operators) by the
    standard recurrence for Gaussian generating functions.
    """
    gamma = sp.require_covariance(gamma)
    n = gamma.shape[0] // 2
    _check_cutoff(cutoff, n)
    d = np.zeros(2 * n) if d is None else np.asarray(d, dtype=float)
    A, b, pref = _bargmann_data(gamma, d)
    G = _recurrence(A, b, pref, cutoff)
    rho = G.reshape(cutoff**n, cutoff**n)
    return _finish(rho, cutoff, n, budget, kind="gaussian")


# --- functionals ---------------------------------------------------------


def fock_entropy(rho: FockDensityMatrix, alpha: float = 1.0) -> float:
    """Von Neumann (``alpha == 1``) or Renyi-``alpha`` entropy in bits from the eigenvalues."""
    w = np.linalg.eigvalsh(rho.matrix)
    w = w[w > EIG_FLOOR]
    if alpha == 1:
        return float(-np.sum(w * np.log2(w)))
    if alpha <= 0:
        raise ValueError("Renyi order must be positive")
    return float(math.log2(np.sum(w**alpha)) / (1.0 - alpha))


def fock_partial_trace(rho: FockDensityMatrix, keep: Sequence[int]) -> FockDensityMatrix:
    keep = list(keep)
    if rho.modes == 1 or keep == list(range(rho.modes)):
        return rho
    if rho.modes != 2 or len(keep) != 1:
        raise ValueError("partial trace supports keeping one mode of two")
    M = rho.cutoff
    t = rho.matrix.reshape(M, M, M, M)
    red = np.einsum("ajbj->ab", t) if keep == [0] else np.einsum("iaib->ab", t)
    return FockDensityMatrix(red, M, 1, rho.trace_deficit, {"reduced_from": rho.meta.get("kind")})


def fock_moments(rho: FockDensityMatrix, budget: float = 1e-6):
    """Displacement ``d`` and covariance ``gamma_jk = 2 Re <(R_j - d_j)(R_k - d_k)>``."""
    if rho.trace_deficit > budget:
        raise TruncationError(f"trace deficit {rho.trace_deficit:.3g} too large for reliable moments")
    M, n = rho.cutoff, rho.modes
    a1 = lowering(M)
    ops = []
    for j in range(n):
        factors = [np.eye(M)] * n
        factors[j] = a1
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        ops.append(op)
    r = rho.matrix

    def expect(op):
        return np.sum(r.T * op)

    mean = np.array([expect(a) for a in ops])
    aa = np.array([[expect(ops[j] @ ops[k]) for k in range(n)] for j in range(n)])
    ada = np.array([[expect(ops[j].conj().T @ ops[k]) for k in range(n)] for j in range(n)])

    # symmetrised second moments of zeta = (a_1..a_n, a_1^dag..a_n^dag)
    mu = np.concatenate([mean, mean.conj()])
    Ssym = np.empty((2 * n, 2 * n), dtype=complex)
    I = np.eye(n)
    Ssym[:n, :n] = aa
    Ssym[n:, n:] = aa.conj()
    Ssym[:n, n:] = ada.T + 0.5 * I
    Ssym[n:, :n] = ada + 0.5 * I
    Ssym -= np.outer(mu, mu)

    L = np.zeros((2 * n, 2 * n), dtype=complex)
    s2 = 1.0 / math.sqrt(2.0)
    for j in range(n):
        L[2 * j, j], L[2 * j, n + j] = s2, s2
        L[2 * j + 1, j], L[2 * j + 1, n + j] = -1j * s2, 1j * s2
    gamma = 2.0 * (L @ Ssym @ L.T).real
    d = (L @ mu).real
    return 0.5 * (gamma + gamma.T), d


def fock_covariance(rho: FockDensityMatrix) -> np.ndarray:
    return fock_moments(rho)[0]


def lossy_kraus(eta: float, cutoff: int) -> list[np.ndarray]:
    """Attenuation Kraus operators ``A_k = sum_n sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k><n|``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmittivity must lie in [0, 1], got {eta}")
    n = np.arange(cutoff)
    ops = []
    for k in range(cutoff):
        A = np.zeros((cutoff, cutoff))
        m = n[k:]
        with np.errstate(divide="ignore"):
            log_w = (
                gammaln(m + 1)
                - gammaln(k + 1)
                - gammaln(m - k + 1)
                + (m - k) * (np.log(eta) if eta > 0 else -np.inf)
                + k * (np.log1p(-eta) if eta < 1 else -np.inf)
            )
        w = np.exp(0.5 * np.where(np.isnan(log_w), -np.inf, log_w))
        if k == 0 and eta == 1.0:
            w = np.ones_like(m, dtype=float)
        if eta == 0.0:
            w = (m == k).astype(float)
        A[m - k, m] = w
        if np.any(A):
            ops.append(A)
    return ops


def apply_lossy_fock(rho: FockDensityMatrix, eta: float) -> FockDensityMatrix:
    if rho.modes != 1:
        raise ValueError("lossy Kraus action is implemented for one mode")
    out = np.zeros_like(rho.matrix)
    for A in lossy_kraus(eta, rho.cutoff):
        out += A @ rho.matrix @ A.T
    return FockDensityMatrix(out, rho.cutoff, 1, max(0.0, 1.0 - float(np.trace(out).real)), {"channel": f"lossy({eta})"})


# --- non-Gaussian comparison states --------------------------------------


def same_covariance_non_gaussian(
    gamma_target,
    seed: int,
    cutoff: int,
    fraction: Optional[float] = None,
    budget: float = DEFICIT_BUDGET,
) -> FockDensityMatrix:
    """Equal mixture of two displaced Gaussians sharing the second moments of ``gamma_target``.

    The component covariance is ``gamma' = gamma_target - 2 delta delta^T`` and
    the components sit at ``+delta`` and ``-delta``. ``delta`` points in a
    seeded random direction with length ``fraction`` times the largest value
    that keeps ``gamma'`` a valid covariance. ``fraction == 0`` returns the
    Gaussian state itself (``meta["gaussian"]`` is set).
    """
    gamma = sp.require_covariance(gamma_target)
    n = gamma.shape[0] // 2
    if n > 2:
        raise ValueError("targets must have one or two modes")
    if sp.symplectic_eigenvalues(gamma).min() <= 1.0 + 1e-9:
        raise ValueError("unsupported target: needs every symplectic eigenvalue > 1")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(2 * n)
    u /= np.linalg.norm(u)
    if fraction is None:
        fraction = float(rng.uniform(0.3, 0.9))
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    Minv = np.linalg.inv(gamma + 1j * sp.symplectic_form(n))
    s_max = 1.0 / math.sqrt(2.0 * float((u @ Minv @ u).real))
    delta = fraction * s_max * u
    inner = gamma - 2.0 * np.outer(delta, delta)
    meta = {
        "kind": "two_point_mixture",
        "seed": seed,
        "fraction": fraction,
        "delta": delta.tolist(),
        "gaussian": fraction == 0.0,
    }
    if fraction == 0.0:
        rho = gaussian_state_fock(gamma, None, cutoff, budget)
        rho.meta.update(meta)
        return rho
    plus = gaussian_state_fock(inner, delta, cutoff, budget)
    minus = gaussian_state_fock(inner, -delta, cutoff, budget)
    return _finish(0.5 * (plus.matrix + minus.matrix), cutoff, n, budget, **meta)


def lossy_mutual_information_fock(rho: FockDensityMatrix, eta: float) -> float:
    """``S(rho) + S(T_eta rho) - S(T_{1-eta} rho)``.

    The environment output of a beam splitter with vacuum ancilla is the
    lossy channel with transmittivity ``1 - eta`` (up to a phase), and the
    reference, output and environment together are pure.
    """
    return fock_entropy(rho) + fock_entropy(apply_lossy_fock(rho, eta)) - fock_entropy(apply_lossy_fock(rho, 1.0 - eta))
