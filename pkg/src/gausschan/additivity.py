"""Numerical residuals for the Gaussian additivity questions.

Residual signs are chosen so that the conjectured inequality reads
``residual >= 0``:

* superadditivity: ``E_G(gamma) - sum_i E_G([gamma]_i)``
* convexity: ``lambda E_G(g1) + (1 - lambda) E_G(g2) - E_G(lambda g1 + (1 - lambda) g2)``
* minimal output entropy: ``nu_{alpha,G}(T x T) - 2 nu_{alpha,G}(T)``, expected ~ 0

Every ``gaussian_eof`` value is an upper bound on the true infimum (each
restart ends at a feasible point). A joint term that is too high biases a
residual upward; marginal terms that are too high bias it downward. Records
therefore carry the restart count, and a value is flagged only when it falls
below ``-threshold``, with the threshold set from a measured noise floor.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import symplectic as sp
from .channels import GaussianChannel, tensor
from .eof import gaussian_eof, gaussian_min_output_entropy, worker_count
from .states import Bipartition, as_covariance, two_mode_squeezed_state

KINDS = ("superadditivity", "convexity", "moe_additivity")
DEFAULT_THRESHOLD = 2e-3
SCAN_COLUMNS = (
    "seed",
    "sample",
    "kind",
    "r1",
    "noise1",
    "r2",
    "noise2",
    "lambda",
    "alpha",
    "channel",
    "residual_bits",
    "restarts",
    "flag",
)


@dataclass
class ResidualRecord:
    kind: str
    residual: float
    tolerance_flag: bool
    inputs: dict = field(default_factory=dict)
    seed: Optional[int] = None
    restarts: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown residual kind {self.kind!r}")
        if not math.isfinite(self.residual):
            raise ValueError("residual must be finite")

    def to_dict(self) -> dict:
        return asdict(self)


def _flag(residual: float, threshold: float) -> bool:
    return bool(residual < -threshold)


def _matrix(m: np.ndarray) -> list:
    return [[float(x) for x in row] for row in np.asarray(m)]


# --- constructions ----------------------------------------------------------


def beam_splitter_network(n: int) -> np.ndarray:
    """Passive ``S = (1/sqrt 2) [[1, 1], [1, -1]]`` between copy 1 and copy 2 of ``n`` modes.

    Mode ``k`` of the first copy is mixed with mode ``k`` of the second, so the
    map is local for any bipartition that treats both copies alike.
    """
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    return np.kron(h, np.eye(2 * n))


def beam_splitter_mix(gamma1, gamma2) -> np.ndarray:
    """``(1/2)[[g1 + g2, g1 - g2], [g1 - g2, g1 + g2]] = S (g1 + g2) S^T``."""
    g1, g2 = as_covariance(gamma1), as_covariance(gamma2)
    if g1.shape != g2.shape:
        raise ValueError(f"shape mismatch {g1.shape} vs {g2.shape}")
    return 0.5 * np.block([[g1 + g2, g1 - g2], [g1 - g2, g1 + g2]])


def theta_reflection(Gamma) -> np.ndarray:
    """``theta Gamma theta`` with ``theta = 1 + (-1)`` on the two halves.

    ``(Gamma + theta Gamma theta) / 2`` is the direct sum of the diagonal blocks.
    """
    Gamma = np.asarray(Gamma, dtype=float)
    half = Gamma.shape[0] // 2
    theta = np.diag(np.concatenate([np.ones(half), -np.ones(half)]))
    return theta @ Gamma @ theta


def copy_bipartition(p: Bipartition, copies: int = 2) -> Bipartition:
    """Bipartition of ``copies`` stacked copies of a system split by ``p``."""
    n = p.n
    a = tuple(m + k * n for k in range(copies) for m in p.modes_a)
    b = tuple(m + k * n for k in range(copies) for m in p.modes_b)
    return Bipartition(a, b)


# --- residuals --------------------------------------------------------------


def _sub_bipartition(p: Bipartition, block: Sequence[int]) -> Bipartition:
    block = list(block)
    local = {m: i for i, m in enumerate(block)}
    a = tuple(local[m] for m in block if m in p.modes_a)
    b = tuple(local[m] for m in block if m in p.modes_b)
    return Bipartition(a, b)


def superadditivity_residual(
    gamma,
    p: Bipartition,
    blocks: Sequence[Sequence[int]],
    restarts: int = 16,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
) -> ResidualRecord:
    """``E_G(gamma) - sum_i E_G([gamma]_i)`` for subsystems ``blocks`` (mode lists).

    Each block must contain modes of both parts; ``gamma`` need not be a direct sum.
    """
    gamma = as_covariance(gamma)
    n = gamma.shape[0] // 2
    p.check(n)
    flat = sorted(m for blk in blocks for m in blk)
    if flat != list(range(n)):
        raise ValueError(f"blocks {list(map(list, blocks))} do not partition modes 0..{n - 1}")
    joint = gaussian_eof(gamma, p, restarts=restarts, seed=seed).value
    parts = []
    for blk in blocks:
        sub = sp.partial_trace(gamma, list(blk))
        parts.append(gaussian_eof(sub, _sub_bipartition(p, blk), restarts=restarts, seed=seed).value)
    residual = joint - sum(parts)
    return ResidualRecord(
        "superadditivity",
        residual,
        _flag(residual, threshold),
        {"gamma": _matrix(gamma), "partition": str(p), "blocks": [list(b) for b in blocks], "joint": joint, "parts": parts},
        seed,
        restarts,
    )


def convexity_residual(
    gamma1,
    gamma2,
    lam: float,
    p: Bipartition,
    restarts: int = 16,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
) -> ResidualRecord:
    """``lam E_G(g1) + (1 - lam) E_G(g2) - E_G(lam g1 + (1 - lam) g2)``."""
    g1, g2 = as_covariance(gamma1), as_covariance(gamma2)
    if g1.shape != g2.shape:
        raise ValueError(f"shape mismatch {g1.shape} vs {g2.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    inputs = {"gamma1": _matrix(g1), "gamma2": _matrix(g2), "lambda": lam, "partition": str(p)}
    if lam in (0.0, 1.0):
        return ResidualRecord("convexity", 0.0, False, inputs, seed, 0)
    e1 = gaussian_eof(g1, p, restarts=restarts, seed=seed).value
    e2 = gaussian_eof(g2, p, restarts=restarts, seed=seed).value
    em = gaussian_eof(lam * g1 + (1.0 - lam) * g2, p, restarts=restarts, seed=seed).value
    residual = lam * e1 + (1.0 - lam) * e2 - em
    inputs.update({"eof1": e1, "eof2": e2, "eof_mix": em})
    return ResidualRecord("convexity", residual, _flag(residual, threshold), inputs, seed, restarts)


def moe_additivity_scan(
    T: GaussianChannel,
    alpha: float = 2.0,
    copies: int = 2,
    samples: int = 50,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
) -> ResidualRecord:
    """``nu_{alpha,G}(T x T) - 2 nu_{alpha,G}(T)`` with ``samples`` restarts for the two-copy problem.

    The two-copy minimization runs over all pure two-mode Gaussian inputs,
    entangled ones included; restarts after the first start from random
    entangled states.
    """
    if T.n != 1:
        raise ValueError("the scan takes a single-mode channel")
    if not alpha > 1:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if copies not in (1, 2):
        raise ValueError("copies must be 1 or 2")
    single = gaussian_min_output_entropy(T, alpha, restarts=max(4, samples // 5), seed=seed).value
    if copies == 1:
        residual = 0.0
        joint = single
    else:
        joint = gaussian_min_output_entropy(tensor(T, T), alpha, restarts=samples, seed=seed).value
        residual = joint - 2.0 * single
    inputs = {"channel": T.to_dict(), "alpha": alpha, "copies": copies, "single": single, "joint": joint}
    return ResidualRecord("moe_additivity", residual, _flag(residual, threshold), inputs, seed, samples)


# --- sample family and scans ------------------------------------------------


def sample_state(
    rng: np.random.Generator,
    symmetric: bool = True,
    r_range=(0.0, 1.5),
    noise_range=(0.0, 2.0),
    local_squeezing: float = 0.5,
) -> tuple[np.ndarray, dict]:
    """Two-mode state ``L (TMS(r) + noise) L^T`` with a random local symplectic ``L``.

    ``symmetric=True`` adds isotropic noise ``noise * I``, which keeps the state
    locally equivalent to a symmetric one; otherwise each quadrature gets an
    independent noise level in ``[0, noise]``.
    """
    r = float(rng.uniform(*r_range))
    noise = float(rng.uniform(*noise_range))
    gamma = np.array(two_mode_squeezed_state(r).gamma)
    if symmetric:
        gamma = gamma + noise * np.eye(4)
    else:
        gamma = gamma + np.diag(rng.uniform(0.0, noise, 4))
    L = sp.direct_sum(sp.random_symplectic(1, rng, local_squeezing), sp.random_symplectic(1, rng, local_squeezing))
    gamma = L @ gamma @ L.T
    return 0.5 * (gamma + gamma.T), {"r": r, "noise": noise}


PAIR = Bipartition((0,), (1,))


def noise_floor(samples: int = 8, seed: int = 0, restarts: int = 4) -> float:
    """Largest ``|E_G(L gamma L^T) - E_G(gamma)|`` over random local ``L`` (exactly 0 in theory)."""
    worst = 0.0
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        gamma, _ = sample_state(rng)
        L = sp.direct_sum(sp.random_symplectic(1, rng, 0.5), sp.random_symplectic(1, rng, 0.5))
        a = gaussian_eof(gamma, PAIR, restarts=restarts, seed=seed).value
        b = gaussian_eof(L @ gamma @ L.T, PAIR, restarts=restarts, seed=seed).value
        worst = max(worst, abs(a - b))
    return worst


def calibrated_threshold(samples: int = 8, seed: int = 0, restarts: int = 4, minimum: float = 1e-6) -> float:
    """Violation threshold: three times the measured noise floor (at least ``minimum``)."""
    return max(minimum, 3.0 * noise_floor(samples, seed, restarts))


def _scan_one(kind: str, seed: int, index: int, restarts: int, threshold: float, channel, alpha):
    rng = np.random.default_rng([seed, index])
    row = {"seed": seed, "sample": index, "kind": kind}
    if kind == "superadditivity":
        g1, m1 = sample_state(rng)
        g2, m2 = sample_state(rng)
        Gamma = beam_splitter_mix(g1, g2)
        rec = superadditivity_residual(
            Gamma, copy_bipartition(PAIR), [(0, 1), (2, 3)], restarts=restarts, seed=seed, threshold=threshold
        )
        row.update({"r1": m1["r"], "noise1": m1["noise"], "r2": m2["r"], "noise2": m2["noise"]})
    elif kind == "convexity":
        g1, m1 = sample_state(rng)
        g2, m2 = sample_state(rng)
        lam = float(rng.uniform(0.0, 1.0))
        rec = convexity_residual(g1, g2, lam, PAIR, restarts=restarts, seed=seed, threshold=threshold)
        row.update({"r1": m1["r"], "noise1": m1["noise"], "r2": m2["r"], "noise2": m2["noise"], "lambda": lam})
    elif kind == "moe_additivity":
        rec = moe_additivity_scan(channel, alpha, 2, restarts, seed + index, threshold)
        row.update({"alpha": alpha, "channel": channel.kind})
    else:
        raise ValueError(f"unknown scan kind {kind!r}")
    row.update({"residual_bits": rec.residual, "restarts": rec.restarts, "flag": rec.tolerance_flag})
    return row, rec


def run_scan(
    kind: str,
    samples: int,
    seed: int = 0,
    restarts: int = 4,
    threshold: float = DEFAULT_THRESHOLD,
    channel: Optional[GaussianChannel] = None,
    alpha: float = 2.0,
    workers: Optional[int] = None,
):
    """Seeded scan; rows and records come back ordered by sample index.

    Every sample draws from its own generator seeded by ``(seed, index)``, so
    results do not depend on evaluation order or thread count.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown scan kind {kind!r}; choose from {KINDS}")
    if samples < 1:
        raise ValueError("need at least one sample")
    if kind == "moe_additivity" and channel is None:
        raise ValueError("the minimal-output-entropy scan needs a channel")
    workers = worker_count() if workers is None else workers

    def job(i):
        return _scan_one(kind, seed, i, restarts, threshold, channel, alpha)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(job, range(samples)))
    else:
        out = [job(i) for i in range(samples)]
    return [o[0] for o in out], [o[1] for o in out]


def rows_to_csv(rows, fmt: str = ".12g") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for row in rows:
        cells = []
        for col in SCAN_COLUMNS:
            v = row.get(col)
            if v is None:
                cells.append("")
            elif isinstance(v, bool):
                cells.append("true" if v else "false")
            elif isinstance(v, float):
                cells.append(format(v, fmt))
            else:
                cells.append(str(v))
        writer.writerow(cells)
    return buf.getvalue()


def summarize(rows, threshold: float = DEFAULT_THRESHOLD) -> dict:
    res = [float(r["residual_bits"]) for r in rows]
    return {
        "count": len(res),
        "min_residual": min(res),
        "median_residual": statistics.median(res),
        "max_residual": max(res),
        "flagged": sum(bool(r["flag"]) for r in rows),
        "threshold": threshold,
    }


def summary_json(rows, threshold: float = DEFAULT_THRESHOLD) -> str:
    return json.dumps(summarize(rows, threshold), sort_keys=True)
