"""Gaussian entanglement of formation, the Gaussian MSW correspondence and
Gaussian minimal output entropies.

The Gaussian EoF of a bipartite covariance matrix ``gamma`` is

    E_G(gamma) = inf { S([Gamma]_A) : Gamma pure, i sigma <= Gamma <= gamma }.

Pure covariance matrices are parameterized through their Siegel coordinates
``Z = X + iY`` (``X`` real symmetric, ``Y`` positive definite): in
``(x_1..x_n, p_1..p_n)`` ordering

    Gamma = [[Y^-1, Y^-1 X], [X Y^-1, Y + X Y^-1 X]],

which covers every pure Gaussian state exactly once with ``n(n+1)``
unconstrained real parameters (``Y = L L^T`` with a log-diagonal Cholesky
factor).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as la
from scipy.optimize import minimize

from . import symplectic as sp
from .channels import GaussianChannel, apply, dilate
from .states import Bipartition, as_covariance, g_function, renyi_from_spectrum, von_neumann_entropy

FEASIBILITY_TOL = 1e-8
PURITY_TOL = 1e-8
DEFAULT_RESTARTS = 16

BARRIER_SCHEDULE = (1e-2,)
PENALTY_SCHEDULE = (1e5, 1e7)
SIMPLEX_PENALTY_SCHEDULE = (1e2, 1e4, 1e6)
RESTART_SPREAD = 0.5

_C_FLOOR = 1e-12  # keeps the entropy derivative finite at pure marginals


class EoFError(ArithmeticError):
    """The optimizer failed to produce a feasible pure covariance matrix."""


def worker_count() -> int:
    """Thread cap from ``GAUSSCHAN_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("GAUSSCHAN_THREADS", "1")))
    except ValueError:
        return 1


# --- Siegel coordinates ----------------------------------------------------


@lru_cache(maxsize=None)
def _layout(n: int):
    """Cached index arrays: xxpp permutation, its inverse, triangle indices."""
    p = np.concatenate([np.arange(0, 2 * n, 2), np.arange(1, 2 * n, 2)])
    return p, np.argsort(p), np.triu_indices(n), np.tril_indices(n), np.diag_indices(n)


def param_count(n: int) -> int:
    return n * (n + 1)


def _unpack(theta: np.ndarray, n: int):
    _, _, iu, il, di = _layout(n)
    k = n * (n + 1) // 2
    X = np.zeros((n, n))
    X[iu] = theta[:k]
    X.T[iu] = theta[:k]
    L = np.zeros((n, n))
    L[il] = theta[k:]
    L[di] = np.exp(L[di])
    return X, L


def pure_covariance(theta, n: int) -> np.ndarray:
    """Pure covariance matrix (interleaved ordering) with Siegel parameters ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (param_count(n),):
        raise ValueError(f"expected {param_count(n)} parameters for {n} modes, got {theta.shape}")
    X, L = _unpack(theta, n)
    Li = la.solve_triangular(L, np.eye(n), lower=True)
    Yi = Li.T @ Li
    YiX = Yi @ X
    G = np.empty((2 * n, 2 * n))
    G[:n, :n] = Yi
    G[:n, n:] = YiX
    G[n:, :n] = YiX.T
    G[n:, n:] = L @ L.T + X @ YiX
    inv = _layout(n)[1]
    G = G[np.ix_(inv, inv)]
    return 0.5 * (G + G.T)


def pure_parameters(Gamma) -> np.ndarray:
    """Inverse of :func:`pure_covariance` for a pure covariance matrix."""
    Gamma = np.asarray(Gamma, dtype=float)
    n = Gamma.shape[0] // 2
    p, _, iu, il, di = _layout(n)
    G = Gamma[np.ix_(p, p)]
    Y = np.linalg.inv(G[:n, :n])
    Y = 0.5 * (Y + Y.T)
    X = G[n:, :n] @ Y
    X = 0.5 * (X + X.T)
    L = np.linalg.cholesky(Y)
    L[di] = np.log(L[di])
    return np.concatenate([X[iu], L[il]])


def _pullback(theta: np.ndarray, n: int, M: np.ndarray) -> np.ndarray:
    """Gradient in ``theta`` of ``F`` given ``M = dF/dGamma`` (``dF = tr(M dGamma)``)."""
    p, _, iu, il, di = _layout(n)
    X, L = _unpack(theta, n)
    Li = la.solve_triangular(L, np.eye(n), lower=True)
    Yi = Li.T @ Li
    Mx = M[np.ix_(p, p)]
    G11, G12, G22 = Mx[:n, :n], Mx[:n, n:], Mx[n:, n:]
    YiX = Yi @ X
    # dF = tr(MY dY) + tr(MX dX) for the block formula of the covariance
    MY = -Yi @ G11 @ Yi - 2.0 * Yi @ G12 @ YiX.T + G22 - YiX @ G22 @ YiX.T
    MX = 2.0 * Yi @ G12 + YiX @ G22 + G22 @ YiX.T
    MY = 0.5 * (MY + MY.T)
    MX = MX + MX.T
    MX[di] *= 0.5
    gL = 2.0 * MY @ L
    gL[di] *= L[di]
    return np.concatenate([MX[iu], gL[il]])


# --- spectral functions and their gradients --------------------------------


def _vn_terms(c: np.ndarray):
    c = np.maximum(c, 1.0 + _C_FLOOR)
    N = 0.5 * (c - 1.0)
    value = float(np.sum(((N + 1.0) * np.log1p(N) - N * np.log(N)) / math.log(2.0)))
    deriv = 0.5 * np.log2((c + 1.0) / (c - 1.0))
    return value, deriv


def _renyi_terms(alpha: float):
    def terms(c: np.ndarray):
        c = np.maximum(c, 1.0)
        value = renyi_from_spectrum(c, alpha)
        hi, lo = 0.5 * (c + 1.0), 0.5 * (c - 1.0)
        num = 0.5 * alpha * (hi ** (alpha - 1.0) - lo ** (alpha - 1.0))
        den = (hi**alpha - lo**alpha) * math.log(2.0) * (alpha - 1.0)
        return value, num / den

    return terms


def _spectral_value_grad(gamma: np.ndarray, terms: Callable):
    """``F = sum_k f(c_k)`` over the symplectic spectrum and ``dF/dgamma``.

    With ``gamma = S D S^T`` and ``T = S^-1``, ``dc_k`` is half the trace of the
    ``k``-th diagonal block of ``T dgamma T^T``. One mode has ``c = sqrt(det)``
    and ``dc = c tr(gamma^-1 dgamma) / 2``.
    """
    if gamma.shape[0] == 2:
        det = gamma[0, 0] * gamma[1, 1] - gamma[0, 1] * gamma[1, 0]
        c = math.sqrt(max(det, 1.0))
        value, deriv = terms(np.array([c]))
        inv = np.array([[gamma[1, 1], -gamma[0, 1]], [-gamma[1, 0], gamma[0, 0]]]) / det
        return value, 0.5 * c * deriv[0] * inv
    wd = sp._williamson_unchecked(gamma)
    value, deriv = terms(wd.spectrum)
    T = np.linalg.inv(wd.S)
    grad = 0.5 * T.T @ (np.repeat(deriv, 2)[:, None] * T)
    return value, 0.5 * (grad + grad.T)


def entanglement_entropy(Gamma, p: Bipartition, tol: float = PURITY_TOL) -> float:
    """Entropy of the reduction of a pure bipartite covariance matrix onto part A."""
    Gamma = as_covariance(Gamma)
    p.check(Gamma.shape[0] // 2)
    if not sp.is_pure(Gamma, tol):
        raise ValueError("entanglement entropy needs a pure covariance matrix")
    return von_neumann_entropy(sp.partial_trace(Gamma, p.modes_a))


# --- results ---------------------------------------------------------------


@dataclass
class EoFResult:
    value: float
    gamma_opt: np.ndarray
    feasibility_gap: float
    iterations: int
    restarts_used: int
    method: str = "barrier"
    restart_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value_bits": float(self.value),
            "gamma_opt": [[float(x) for x in row] for row in self.gamma_opt],
            "feasibility_gap": float(self.feasibility_gap),
            "restarts_used": int(self.restarts_used),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(m)[0])


class _Problem:
    """Objective pieces of one Gaussian EoF instance."""

    def __init__(self, gamma: np.ndarray, p: Bipartition):
        self.gamma = gamma
        self.n = gamma.shape[0] // 2
        # the entropy of a pure state's reduction is the same on both sides
        side = p.modes_a if len(p.modes_a) <= len(p.modes_b) else p.modes_b
        self.idx = sp.quadrature_indices(side, self.n)
        self.evaluations = 0

    def entropy(self, theta) -> float:
        G = pure_covariance(theta, self.n)
        return _spectral_value_grad(G[np.ix_(self.idx, self.idx)], _vn_terms)[0]

    def gap(self, theta) -> float:
        return _min_eig(self.gamma - pure_covariance(theta, self.n))

    def _entropy_grad(self, G):
        value, gA = _spectral_value_grad(G[np.ix_(self.idx, self.idx)], _vn_terms)
        M = np.zeros_like(G)
        M[np.ix_(self.idx, self.idx)] = gA
        return value, M

    def barrier(self, t: float):
        def f(theta):
            self.evaluations += 1
            G = pure_covariance(theta, self.n)
            w, v = np.linalg.eigh(self.gamma - G)
            if w[0] <= 0:
                return np.inf, np.zeros_like(theta)
            value, M = self._entropy_grad(G)
            M = M + t * (v / w) @ v.T
            return value - t * float(np.sum(np.log(w))), _pullback(theta, self.n, M)

        return f

    def penalty(self, mu: float, with_grad: bool = True):
        def f(theta):
            self.evaluations += 1
            G = pure_covariance(theta, self.n)
            w, v = np.linalg.eigh(self.gamma - G)
            neg = np.minimum(w, 0.0)
            if not with_grad:
                return self.entropy(theta) + mu * float(np.sum(neg**2))
            value, M = self._entropy_grad(G)
            M = M - 2.0 * mu * (v * neg) @ v.T
            return value + mu * float(np.sum(neg**2)), _pullback(theta, self.n, M)

        return f

    def snap_back(self, inside: np.ndarray, target: np.ndarray, steps: int = 60) -> np.ndarray:
        """Feasible point on the segment from a feasible ``inside`` toward ``target``."""
        if self.gap(target) >= 0.0:
            return target
        lo, hi = 0.0, 1.0
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            if self.gap(inside + mid * (target - inside)) >= 0.0:
                lo = mid
            else:
                hi = mid
        return inside + lo * (target - inside)


def _strict_start(prob: _Problem, anchor: np.ndarray, proposal: np.ndarray, margin: float) -> np.ndarray:
    """Pull ``proposal`` toward ``anchor`` until it is strictly feasible."""
    step = proposal - anchor
    for _ in range(60):
        cand = anchor + step
        if prob.gap(cand) > margin:
            return cand
        step = 0.5 * step
    return anchor


def _run_restart(prob: _Problem, start: np.ndarray, anchor: np.ndarray, method: str, interior: bool):
    if method == "simplex":
        theta = start
        for mu in SIMPLEX_PENALTY_SCHEDULE:
            res = minimize(
                prob.penalty(mu, with_grad=False),
                theta,
                method="Nelder-Mead",
                options={"xatol": 1e-8, "fatol": 1e-10, "maxfev": 4000 * len(theta), "adaptive": True},
            )
            theta = res.x
        theta = prob.snap_back(start if prob.gap(start) >= 0 else anchor, theta)
        return theta

    theta = start
    inside = start
    if interior:
        for t in BARRIER_SCHEDULE:
            res = minimize(prob.barrier(t), theta, jac=True, method="BFGS", options={"gtol": 1e-9, "maxiter": 2000})
            if np.all(np.isfinite(res.x)) and prob.gap(res.x) > 0:
                theta = res.x
        inside = theta
    for mu in PENALTY_SCHEDULE:
        res = minimize(prob.penalty(mu), theta, jac=True, method="BFGS", options={"gtol": 1e-10, "maxiter": 2000})
        if np.all(np.isfinite(res.x)):
            theta = res.x
    return prob.snap_back(inside if prob.gap(inside) >= 0 else anchor, theta)


def gaussian_eof(
    gamma,
    p: Bipartition,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    method: str = "barrier",
    workers: Optional[int] = None,
) -> EoFResult:
    """Gaussian entanglement of formation of ``gamma`` across ``p`` (bits).

    Every restart ends at a feasible pure ``Gamma <= gamma``, so each value is
    an upper bound on the infimum; the smallest is returned (ties broken by the
    lexicographically smallest parameter vector).

    ``method="barrier"`` runs a log-det barrier continuation followed by an
    exterior penalty continuation, both with quasi-Newton steps on analytic
    gradients. ``method="simplex"`` uses the derivative-free penalty route
    (Nelder-Mead with penalty weights 1e2, 1e4, 1e6).
    """
    gamma = as_covariance(gamma)
    n = gamma.shape[0] // 2
    p.check(n)
    if restarts < 1:
        raise ValueError("need at least one restart")
    if method not in ("barrier", "simplex"):
        raise ValueError(f"unknown method {method!r}")

    if sp.is_pure(gamma, PURITY_TOL):
        # the only pure Gamma below a pure gamma is gamma itself
        value = von_neumann_entropy(sp.partial_trace(gamma, p.modes_a))
        return EoFResult(value, gamma.copy(), 0.0, 0, 0, method, [value])

    prob = _Problem(gamma, p)
    wd = sp.williamson(gamma)
    anchor = pure_parameters(wd.S @ wd.S.T)
    interior = bool(wd.spectrum.min() > 1.0 + 1e-7)
    margin = 1e-9 if interior else -np.inf

    rng = np.random.default_rng(seed)
    starts = [anchor]
    for _ in range(restarts - 1):
        prop = anchor + RESTART_SPREAD * rng.standard_normal(anchor.shape)
        starts.append(_strict_start(prob, anchor, prop, margin) if interior else prop)

    def run(start):
        local = _Problem(gamma, p)
        theta = _run_restart(local, start, anchor, method, interior)
        return local.entropy(theta), theta, local.evaluations

    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        outcomes = [run(s) for s in starts]

    value, theta, _ = min(outcomes, key=lambda o: (o[0], tuple(o[1])))
    Gamma = pure_covariance(theta, n)
    gap = _min_eig(gamma - Gamma)
    if gap < -FEASIBILITY_TOL or not np.isfinite(value):
        raise EoFError(f"no feasible pure covariance found (gap {gap:.3g})")
    return EoFResult(
        value=max(0.0, float(value)),
        gamma_opt=Gamma,
        feasibility_gap=gap,
        iterations=sum(o[2] for o in outcomes),
        restarts_used=len(starts),
        method=method,
        restart_values=[float(o[0]) for o in outcomes],
    )


# --- Gaussian MSW correspondence and minimal output entropy ----------------


def dilated_input(T: GaussianChannel, gamma) -> tuple[np.ndarray, Bipartition]:
    """``gamma' = S (gamma + gamma_0) S^T`` with the system | environment split."""
    gamma = as_covariance(gamma)
    dil = dilate(T)
    joint = dil.joint(gamma)
    part = Bipartition(tuple(range(dil.n)), tuple(range(dil.n, dil.n + dil.m)))
    return joint, part


def msw_capacity(T: GaussianChannel, gamma, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> float:
    """``C_{1,G}(T, gamma) = S(T(gamma)) - E_G(gamma')`` for a dilatable channel."""
    gamma = as_covariance(gamma)
    joint, part = dilated_input(T, gamma)
    eof = gaussian_eof(joint, part, restarts=restarts, seed=seed)
    return max(0.0, von_neumann_entropy(apply(T, gamma)) - eof.value)


@dataclass
class MinOutputEntropy:
    value: float
    gamma_in: np.ndarray
    route: str
    restarts_used: int


def _entropy_terms(alpha: float):
    if alpha == 1:
        return _vn_terms
    if alpha < 1:
        raise ValueError(f"minimal output entropy needs alpha >= 1, got {alpha}")
    return _renyi_terms(alpha)


def _output_entropy_direct(T: GaussianChannel, alpha: float, restarts: int, seed: int, alpha_terms=None):
    """Minimize ``S_alpha(T(Gamma))`` over pure Gaussian inputs ``Gamma``."""
    n = T.n
    terms = alpha_terms or _entropy_terms(alpha)
    X, Y = T.X, T.Y

    def f(theta):
        G = pure_covariance(theta, n)
        out = X.T @ G @ X + Y
        value, M = _spectral_value_grad(0.5 * (out + out.T), terms)
        return value, _pullback(theta, n, X @ M @ X.T)

    rng = np.random.default_rng(seed)
    starts = [np.zeros(param_count(n))]
    starts += [rng.normal(0.0, 0.7, param_count(n)) for _ in range(restarts - 1)]
    best = None
    for s in starts:
        res = minimize(f, s, jac=True, method="BFGS", options={"gtol": 1e-10, "maxiter": 2000})
        value = f(res.x)[0]
        key = (value, tuple(res.x))
        if best is None or key < best[0]:
            best = (key, res.x)
    (value, _), theta = best
    return MinOutputEntropy(float(value), pure_covariance(theta, n), "direct", len(starts))


def _mixed_covariance(phi: np.ndarray, n: int) -> np.ndarray:
    """Valid covariance ``Gamma(theta) + R R^T`` from ``phi = (theta, R entries)``."""
    k = param_count(n)
    G = pure_covariance(phi[:k], n)
    R = np.zeros((2 * n, 2 * n))
    R[np.tril_indices(2 * n)] = phi[k:]
    return G + R @ R.T


def _output_entropy_eof(T: GaussianChannel, restarts: int, seed: int, inner_restarts: int, maxfev: int):
    """``inf_gamma E_G(gamma')`` over (possibly mixed) Gaussian inputs."""
    n = T.n
    k = param_count(n)
    dim = k + (2 * n) * (2 * n + 1) // 2

    def f(phi):
        gamma = _mixed_covariance(phi, n)
        joint, part = dilated_input(T, gamma)
        return gaussian_eof(joint, part, restarts=inner_restarts, seed=seed).value

    rng = np.random.default_rng(seed)
    starts = [np.concatenate([np.zeros(k), 0.3 * np.eye(2 * n)[np.tril_indices(2 * n)]])]
    starts += [rng.normal(0.0, 0.5, dim) for _ in range(restarts - 1)]
    best = None
    for s in starts:
        res = minimize(f, s, method="Nelder-Mead", options={"maxfev": maxfev, "xatol": 1e-6, "fatol": 1e-9})
        key = (float(res.fun), tuple(res.x))
        if best is None or key < best[0]:
            best = (key, res.x)
    (value, _), phi = best
    return MinOutputEntropy(value, _mixed_covariance(phi, n), "eof", len(starts))


def gaussian_min_output_entropy(
    T: GaussianChannel,
    alpha: float = 1.0,
    route: str = "direct",
    restarts: int = 8,
    seed: int = 0,
    inner_restarts: int = 1,
    maxfev: int = 100,
) -> MinOutputEntropy:
    """Gaussian minimal output Renyi-``alpha`` entropy ``nu_{alpha,G}(T)``.

    ``route="direct"`` minimizes the output entropy over pure Gaussian inputs;
    ``route="eof"`` (``alpha == 1`` only) minimizes the Gaussian EoF of the
    dilated input over all Gaussian inputs. Each outer evaluation of the
    ``"eof"`` route is a full inner EoF optimization, so it is far slower; it
    exists to cross-check the direct route.
    """
    if not alpha >= 1:
        raise ValueError(f"minimal output entropy needs alpha >= 1, got {alpha}")
    if restarts < 1:
        raise ValueError("need at least one restart")
    if route == "direct":
        return _output_entropy_direct(T, alpha, restarts, seed)
    if route == "eof":
        if alpha != 1:
            raise ValueError("the entanglement-of-formation route is defined for alpha == 1")
        return _output_entropy_eof(T, restarts, seed, inner_restarts, maxfev)
    raise ValueError(f"unknown route {route!r}")
