"""Capacity formulas and bounds for single-mode Gaussian channels (bits per use)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import GaussianChannel, amplifier, apply_to_subsystem, classical_noise, thermal_noise
from .states import GaussianState, g_function, purify, thermal_state, von_neumann_entropy

KINDS = ("classical", "quantum_lower", "quantum_upper", "ea_classical", "ea_quantum")
CSV_COLUMNS = ("kind", "eta", "c", "N", "value_bits", "reason")


def _check_eta(eta: float, allow_amplifier: bool = False) -> None:
    if not math.isfinite(eta) or eta < 0 or (eta > 1 and not allow_amplifier):
        limit = "[0, inf)" if allow_amplifier else "[0, 1]"
        raise ValueError(f"eta must lie in {limit}, got {eta}")


def _check_c(c: float) -> None:
    if not c >= 1.0:
        raise ValueError(f"noise parameter c must be >= 1, got {c}")


def _check_N(N: float) -> None:
    if not N >= 0:
        raise ValueError(f"mean photon number must be >= 0, got {N}")


def classical_capacity_lossy(eta: float, N: float) -> float:
    """Energy-constrained classical capacity ``g(eta N)`` of the lossy channel."""
    _check_eta(eta)
    _check_N(N)
    return g_function(eta * N)


def holevo_coherent_ensemble(eta: float, N: float, c: float = 1.0) -> float:
    """Holevo quantity of a Gaussian-distributed coherent-state ensemble.

    Tight (equal to the capacity) for ``c == 1``; a lower bound otherwise.
    """
    _check_eta(eta)
    _check_N(N)
    _check_c(c)
    noise = (1.0 - eta) * (c - 1.0) / 2.0
    return g_function(eta * N + noise) - g_function(noise)


def broadband_classical_capacity(eta: float, P: float, t: float) -> float:
    """Leading-order capacity ``t sqrt(eta) sqrt(pi P / 3) / ln 2`` (bits over time ``t``)."""
    _check_eta(eta)
    if not P > 0 or not t > 0:
        raise ValueError("power and transmission time must be positive")
    return t * math.sqrt(eta) * math.sqrt(math.pi * P / 3.0) / math.log(2.0)


def output_photon_number(eta: float, c: float, N: float) -> float:
    if eta <= 1.0:
        return eta * N + (1.0 - eta) * (c - 1.0) / 2.0
    return eta * N + (eta - 1.0) * (c + 1.0) / 2.0


def coherent_information_closed(eta: float, c: float, N: float) -> float:
    """Coherent information of a thermal input through attenuation or amplification.

    ``eta == 1`` returns the analytic limit ``g(N)``.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    _check_eta(eta, allow_amplifier=True)
    _check_c(c)
    _check_N(N)
    if eta == 1.0:
        return g_function(N)
    Np = output_photon_number(eta, c, N)
    D = math.sqrt((N + Np + 1.0) ** 2 - 4.0 * eta * N * (N + 1.0))
    a = max(0.0, 0.5 * (D + Np - N - 1.0))
    b = max(0.0, 0.5 * (D - Np + N - 1.0))
    return g_function(Np) - g_function(a) - g_function(b)


def coherent_information_general(T: GaussianChannel, s) -> float:
    """``S(T(rho)) - S((id x T)(psi))`` using a Gaussian purification ``psi``."""
    gamma = s.gamma if isinstance(s, GaussianState) else np.asarray(s, dtype=float)
    if gamma.shape != T.X.shape:
        raise ValueError(f"channel acts on {T.n} modes, state has {gamma.shape[0] // 2}")
    pure, part = purify(gamma)
    joint = apply_to_subsystem(T, pure.gamma, part.modes_a)
    out = joint[: gamma.shape[0], : gamma.shape[0]]
    return von_neumann_entropy(out) - von_neumann_entropy(joint)


def mutual_information(T: GaussianChannel, s) -> float:
    """Quantum mutual information ``S(rho) + J(rho, T)``."""
    gamma = s.gamma if isinstance(s, GaussianState) else np.asarray(s, dtype=float)
    return von_neumann_entropy(gamma) + coherent_information_general(T, gamma)


def _unconstrained_coherent_information(eta: float, c: float) -> float:
    # N -> infinity limit of the closed form
    if eta == 1.0:
        return math.inf
    return math.log2(eta / abs(1.0 - eta)) - g_function(0.5 * (c - 1.0))


def quantum_capacity_lower_bound(
    eta: float, c: float = 1.0, N: Optional[float] = None, xatol: float = 1e-10
) -> float:
    """Single-shot bound ``max(0, sup_{N' <= N} J)``; ``N=None`` is unconstrained."""
    _check_eta(eta, allow_amplifier=True)
    _check_c(c)
    if eta == 0 or (eta <= 0.5 and c == 1.0):
        # antidegradable: coherent information never positive
        return 0.0
    if N is None:
        return max(0.0, _unconstrained_coherent_information(eta, c))
    _check_N(N)
    if N == 0:
        return 0.0

    def f(x):
        return coherent_information_closed(eta, c, x)

    grid = np.concatenate([[0.0], N * np.geomspace(1e-6, 1.0, 48)])
    vals = np.array([f(x) for x in grid])
    k = int(np.argmax(vals))
    best = vals[k]
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": xatol})
        best = max(best, -res.fun)
    return max(0.0, best)


def quantum_capacity_upper_bound(eta: float, c: float = 1.0) -> float:
    """``max(0, log2(1+eta) - log2|1-eta| - log2 c)``; infinite at ``eta == 1``.

    Zero for ``eta <= 1/2`` and ``c == 1`` (no-cloning).
    """
    _check_eta(eta, allow_amplifier=True)
    _check_c(c)
    if eta == 1.0:
        return math.inf
    if eta <= 0.5 and c == 1.0:
        return 0.0
    return max(0.0, math.log2(1.0 + eta) - math.log2(abs(1.0 - eta)) - math.log2(c))


def classical_noise_quantum_lower_bound(y: float, N: float, xatol: float = 1e-10) -> float:
    """``max(0, sup_{N' <= N} J)`` over thermal inputs of the classical noise channel ``Y = y I``."""
    if not y >= 0:
        raise ValueError(f"noise variance must be >= 0, got {y}")
    _check_N(N)
    if N == 0:
        return 0.0
    T = classical_noise(y)

    def f(x):
        return coherent_information_general(T, thermal_state(x))

    if y == 0:
        return g_function(N)
    grid = np.concatenate([[0.0], N * np.geomspace(1e-6, 1.0, 48)])
    vals = np.array([f(x) for x in grid])
    k = int(np.argmax(vals))
    best = vals[k]
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": xatol})
        best = max(best, -res.fun)
    return max(0.0, float(best))


def ea_classical_capacity(eta: float, c: float, N: float) -> float:
    """Entanglement-assisted classical capacity ``g(N) + J`` of the attenuator family."""
    _check_eta(eta)
    _check_c(c)
    _check_N(N)
    if eta == 0:
        return 0.0
    return max(0.0, g_function(N) + coherent_information_closed(eta, c, N))


def ea_quantum_capacity(eta: float, c: float, N: float) -> float:
    return 0.5 * ea_classical_capacity(eta, c, N)


# --- reports -------------------------------------------------------------


@dataclass
class CapacityReport:
    kind: str
    value: Optional[float]
    eta: float
    c: float
    N: Optional[float]
    channel: Optional[dict] = None
    reason: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown capacity kind {self.kind!r}")

    def row(self) -> dict:
        return {"kind": self.kind, "eta": self.eta, "c": self.c, "N": self.N, "value_bits": self.value, "reason": self.reason}

    def to_dict(self) -> dict:
        return asdict(self)


def _channel_for(family: str, eta: float, c: float, y: Optional[float]) -> GaussianChannel:
    if family in ("lossy", "thermal", "thermal_noise"):
        return thermal_noise(eta, c)
    if family == "amplifier":
        return amplifier(eta, c)
    if family == "classical":
        return classical_noise(y)
    raise ValueError(f"unsupported family {family!r}")


def capacity_reports(
    family: str, eta: float, c: float, N: float, y: Optional[float] = None
) -> list[CapacityReport]:
    """All five capacity kinds for one parameter point; undefined kinds carry a reason.

    ``family`` is ``lossy`` (forces ``c = 1``), ``thermal``, ``amplifier`` or
    ``classical`` (noise variance ``y``; ``eta`` is reported as 1).
    """
    if family == "lossy":
        c = 1.0
    if family == "classical":
        if y is None:
            raise ValueError("the classical noise channel needs a noise variance y")
        eta, c = 1.0, 1.0
    _check_N(N)
    chan = _channel_for(family, eta, c, y).to_dict()
    out = []

    def add(kind, fn):
        try:
            value = fn()
        except ValueError as exc:
            out.append(CapacityReport(kind, None, eta, c, N, chan, str(exc)))
            return
        if value is not None and math.isinf(value):
            out.append(CapacityReport(kind, None, eta, c, N, chan, "unbounded"))
            return
        out.append(CapacityReport(kind, value, eta, c, N, chan))

    def unavailable(reason):
        def fn():
            raise ValueError(reason)

        return fn

    if family == "classical":
        add("classical", unavailable("only a lower bound is known for the classical noise channel"))
        add("quantum_lower", lambda: classical_noise_quantum_lower_bound(y, N))
        add("quantum_upper", unavailable("no closed-form upper bound for the classical noise channel"))
        add("ea_classical", unavailable("entanglement-assisted formula covers attenuators only"))
        add("ea_quantum", unavailable("entanglement-assisted formula covers attenuators only"))
        return out

    def classical():
        if family == "amplifier":
            raise ValueError("no closed form for the amplifier classical capacity")
        if c == 1.0:
            return classical_capacity_lossy(eta, N)
        raise ValueError("only a lower bound (holevo_coherent_ensemble) is known for c > 1")

    def ea():
        if family == "amplifier":
            raise ValueError("entanglement-assisted formula covers attenuators only")
        return ea_classical_capacity(eta, c, N)

    def ea_q():
        if family == "amplifier":
            raise ValueError("entanglement-assisted formula covers attenuators only")
        return ea_quantum_capacity(eta, c, N)

    add("classical", classical)
    add("quantum_lower", lambda: quantum_capacity_lower_bound(eta, c, N))
    add("quantum_upper", lambda: quantum_capacity_upper_bound(eta, c))
    add("ea_classical", ea)
    add("ea_quantum", ea_q)
    return out


def _cell(v, fmt: str) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(v, fmt)


def reports_to_csv(reports, fmt=".12g") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        row = rep.row()
        writer.writerow([_cell(row[k], fmt) for k in CSV_COLUMNS])
    return buf.getvalue()
