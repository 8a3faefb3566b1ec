"""Independent reference computations used by the test suite.

Nothing here calls the optimizer in ``gausschan.eof``.
"""

from __future__ import annotations

import math

import numpy as np

from gausschan import states as st
from gausschan import symplectic as sp


def _squeezed_tms_batch(r: float, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """``(Z(s1) + Z(s2)) TMS(r) (Z(s1) + Z(s2))^T`` for arrays of squeezings."""
    tms = st.two_mode_squeezed_state(r).gamma
    z = np.stack([np.exp(-s1), np.exp(s1), np.exp(-s2), np.exp(s2)], axis=-1)
    return z[..., :, None] * tms * z[..., None, :]


def symmetric_eof_grid(
    gamma: np.ndarray, grid: int = 100, span: float = 1.5, r_max: float = 3.0, bisections: int = 40
) -> float:
    """Gaussian EoF of a symmetric two-mode state by brute-force search.

    Candidates are ``(Z(s1) + Z(s2)) TMS(r) (Z(s1) + Z(s2))^T`` with local
    squeezers ``Z``; their entanglement ``g(sinh^2 r)`` grows with ``r``.
    Feasibility of a given ``r`` is decided by the largest
    ``lambda_min(gamma - Gamma)`` over a ``grid x grid`` mesh of local
    squeezings, refined twice around the best mesh point. The smallest
    feasible ``r`` is located by a coarse upward scan and then bisection.
    """

    def best_gap(r: float) -> float:
        centre = np.zeros(2)
        width = span
        best = -np.inf
        for _ in range(3):
            axis = np.linspace(-width, width, grid)
            s1, s2 = np.meshgrid(centre[0] + axis, centre[1] + axis, indexing="ij")
            vals = np.linalg.eigvalsh(gamma - _squeezed_tms_batch(r, s1, s2))[..., 0]
            k = np.unravel_index(np.argmax(vals), vals.shape)
            best = max(best, float(vals[k]))
            centre = np.array([s1[k], s2[k]])
            width = 4.0 * width / grid
        return best

    if best_gap(0.0) >= 0:
        return 0.0
    scan = np.linspace(0.0, r_max, 121)
    feasible = [r for r in scan[1:] if best_gap(r) >= 0]
    if not feasible:
        raise ValueError("no feasible two-mode squeezed decomposition on the scan")
    hi = feasible[0]
    lo = hi - (scan[1] - scan[0])
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if best_gap(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return st.g_function(math.sinh(hi) ** 2)


def symmetric_eof_closed_form(a: float, c1: float, c2: float) -> float:
    """Literature value for symmetric states ``[[a I, C], [C, a I]]``, ``C = diag(c1, -c2)``.

    The optimal decomposition is a two-mode squeezed state with
    ``e^{-2r} = sqrt((a - c1)(a - c2))`` (zero when that exceeds one).
    """
    delta = math.sqrt((a - c1) * (a - c2))
    if delta >= 1.0:
        return 0.0
    return st.g_function(math.sinh(-0.5 * math.log(delta)) ** 2)


def noisy_tms(cosh2r: float, noise: float) -> np.ndarray:
    r = 0.5 * math.acosh(cosh2r)
    return st.two_mode_squeezed_state(r).gamma + noise * np.eye(4)
