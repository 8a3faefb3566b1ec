"""Gaussian channels acting on covariance matrices as ``gamma -> X^T gamma X + Y``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import symplectic as sp
from .states import GaussianState, two_mode_squeezed_state, vacuum


class UnsupportedChannelError(ValueError):
    """Raised when an operation has no construction for a channel family."""


@dataclass(frozen=True)
class GaussianChannel:
    X: np.ndarray
    Y: np.ndarray
    kind: str = "general"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        if X.shape != Y.shape or X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] % 2:
            raise ValueError(f"X and Y must be equal-size square matrices of even dimension, got {X.shape}, {Y.shape}")
        if np.max(np.abs(Y - Y.T), initial=0.0) > 1e-12:
            raise ValueError("Y must be symmetric")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", 0.5 * (Y + Y.T))

    @property
    def n(self) -> int:
        return self.X.shape[0] // 2

    def is_valid(self, tol: float = sp.DEFAULT_TOL) -> bool:
        return validate_channel(self.X, self.Y, tol)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "X": self.X.tolist(),
            "Y": self.Y.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GaussianChannel":
        kind = doc.get("kind", "general")
        params = doc.get("params", {}) or {}
        if kind in _FAMILIES and "X" not in doc:
            return named_channel(kind, **params)
        return cls(np.asarray(doc["X"]), np.asarray(doc["Y"]), kind, params)


def validate_channel(X, Y, tol: float = sp.DEFAULT_TOL) -> bool:
    """Complete positivity: ``Y + i sigma - i X^T sigma X`` is PSD."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] % 2:
        raise ValueError(f"dimension mismatch: X {X.shape}, Y {Y.shape}")
    if np.max(np.abs(Y - Y.T)) > tol:
        return False
    sigma = sp.symplectic_form(X.shape[0] // 2)
    M = 0.5 * (Y + Y.T) + 1j * (sigma - X.T @ sigma @ X)
    return bool(np.linalg.eigvalsh(M).min() >= -tol)


def cp_condition_single_mode(X, Y, tol: float = sp.DEFAULT_TOL) -> bool:
    """Determinant form of complete positivity for one mode."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != (2, 2) or Y.shape != (2, 2):
        raise ValueError("single-mode criterion needs 2x2 matrices")
    if np.linalg.eigvalsh(0.5 * (Y + Y.T)).min() < -tol:
        return False
    return bool(np.linalg.det(Y) >= (np.linalg.det(X) - 1.0) ** 2 - tol)


def identity_channel(n: int = 1) -> GaussianChannel:
    return GaussianChannel(np.eye(2 * n), np.zeros((2 * n, 2 * n)), "identity", {"n": n})


def classical_noise(Y) -> GaussianChannel:
    """``X = I``, ``Y >= 0``. A scalar ``Y`` means ``Y * I_2``."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 0:
        params = {"y": float(Y)}
        Y = float(Y) * np.eye(2)
    else:
        params = {"Y": Y.tolist()}
    if np.linalg.eigvalsh(0.5 * (Y + Y.T)).min() < -sp.DEFAULT_TOL:
        raise ValueError("classical noise needs Y >= 0")
    return GaussianChannel(np.eye(Y.shape[0]), Y, "classical_noise", params)


def thermal_noise(eta: float, c: float) -> GaussianChannel:
    """Beam splitter coupling to a thermal mode: ``gamma -> eta gamma + (1-eta) c I``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmittivity must lie in [0, 1], got {eta}")
    if c < 1.0:
        raise ValueError(f"thermal environment needs c >= 1, got {c}")
    kind = "lossy" if c == 1.0 else "thermal_noise"
    params = {"eta": float(eta)} if c == 1.0 else {"eta": float(eta), "c": float(c)}
    return GaussianChannel(math.sqrt(eta) * np.eye(2), (1.0 - eta) * c * np.eye(2), kind, params)


def lossy(eta: float) -> GaussianChannel:
    """Attenuation channel ``gamma -> eta gamma + (1-eta) I``."""
    return thermal_noise(eta, 1.0)


def amplifier(eta: float, c: float = 1.0) -> GaussianChannel:
    """``X = sqrt(eta) I``, ``Y = (eta-1) c I`` with ``eta > 1``."""
    if not eta > 1.0:
        raise ValueError(f"amplification needs eta > 1, got {eta}")
    if c < 1.0:
        raise ValueError(f"amplifier noise needs c >= 1, got {c}")
    return GaussianChannel(
        math.sqrt(eta) * np.eye(2),
        (eta - 1.0) * c * np.eye(2),
        "amplifier",
        {"eta": float(eta), "c": float(c)},
    )


def fiber_transmittivity(length: float, absorption_length: float) -> float:
    if length < 0 or absorption_length <= 0:
        raise ValueError("fiber needs length >= 0 and absorption length > 0")
    return math.exp(-length / absorption_length)


def fiber(length: float, absorption_length: float) -> GaussianChannel:
    """Lossy channel with ``eta = exp(-length / absorption_length)``."""
    return lossy(fiber_transmittivity(length, absorption_length))


_FAMILIES = {
    "identity": identity_channel,
    "classical_noise": classical_noise,
    "thermal_noise": thermal_noise,
    "lossy": lossy,
    "amplifier": amplifier,
    "fiber": fiber,
}


def named_channel(kind: str, **params) -> GaussianChannel:
    try:
        factory = _FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown channel family {kind!r}; choose from {sorted(_FAMILIES)}") from None
    if kind == "fiber":
        return fiber(params["length"], params["absorption_length"])
    if kind == "classical_noise":
        return classical_noise(params["y"] if "y" in params else params["Y"])
    return factory(**params)


def broadband_lossy(eta: float, t: float, modes: int) -> list[tuple[float, GaussianChannel]]:
    """Finite frequency grid ``omega_i = 2 pi i / t`` of identical lossy channels."""
    if t <= 0 or modes < 1:
        raise ValueError("need t > 0 and at least one mode")
    return [(2.0 * math.pi * i / t, lossy(eta)) for i in range(1, modes + 1)]


# --- action --------------------------------------------------------------


def apply(T: GaussianChannel, s):
    """Apply ``T`` to a covariance matrix (or a GaussianState, moving ``d -> X^T d``)."""
    if isinstance(s, GaussianState):
        return GaussianState(apply(T, s.gamma), T.X.T @ s.d)
    gamma = np.asarray(s, dtype=float)
    if gamma.shape != T.X.shape:
        raise ValueError(f"channel acts on {T.n} modes, covariance has shape {gamma.shape}")
    out = T.X.T @ gamma @ T.X + T.Y
    return 0.5 * (out + out.T)


def embed_channel(T: GaussianChannel, modes: Sequence[int], n: int) -> GaussianChannel:
    """``T`` on ``modes`` and the identity on the remaining modes of ``n``."""
    idx = sp.quadrature_indices(modes, n)
    if len(idx) != T.X.shape[0]:
        raise ValueError(f"channel acts on {T.n} modes, {len(modes)} indices given")
    X = np.eye(2 * n)
    Y = np.zeros((2 * n, 2 * n))
    X[np.ix_(idx, idx)] = T.X
    Y[np.ix_(idx, idx)] = T.Y
    return GaussianChannel(X, Y, "embedded", {"inner": T.kind, "modes": list(modes)})


def apply_to_subsystem(T: GaussianChannel, s, modes: Sequence[int]):
    gamma = s.gamma if isinstance(s, GaussianState) else np.asarray(s, dtype=float)
    return apply(embed_channel(T, modes, gamma.shape[0] // 2), s)


def compose(T2: GaussianChannel, T1: GaussianChannel) -> GaussianChannel:
    """``T2 after T1``: ``X = X1 X2``, ``Y = X2^T Y1 X2 + Y2``."""
    if T1.X.shape != T2.X.shape:
        raise ValueError(f"mode mismatch: {T1.n} vs {T2.n}")
    return GaussianChannel(
        T1.X @ T2.X,
        T2.X.T @ T1.Y @ T2.X + T2.Y,
        "composite",
        {"first": T1.to_dict(), "second": T2.to_dict()},
    )


def tensor(*channels: GaussianChannel) -> GaussianChannel:
    return GaussianChannel(
        sp.direct_sum(*[T.X for T in channels]),
        sp.direct_sum(*[T.Y for T in channels]),
        "tensor",
        {"factors": [T.to_dict() for T in channels]},
    )


# --- dilations -----------------------------------------------------------


@dataclass(frozen=True)
class ChannelDilation:
    """Symplectic ``S`` on system + environment with pure environment ``env``.

    The system occupies the first ``n`` modes of ``S``.
    """

    S: np.ndarray
    env: GaussianState
    n: int

    @property
    def m(self) -> int:
        return self.env.n

    def joint(self, gamma) -> np.ndarray:
        """``S (gamma + env) S^T`` on ``n + m`` modes."""
        out = self.S @ sp.direct_sum(np.asarray(gamma, dtype=float), self.env.gamma) @ self.S.T
        return 0.5 * (out + out.T)

    def output(self, gamma) -> np.ndarray:
        return sp.partial_trace(self.joint(gamma), range(self.n))


def dilate(T: GaussianChannel) -> ChannelDilation:
    """Stinespring dilation for the lossy, thermal, amplifier and isotropic classical-noise families.

    The classical-noise dilation uses loss followed by amplification and is
    not minimal (two environment modes).
    """
    kind, p = T.kind, T.params
    if kind == "identity" and T.n == 1:
        return ChannelDilation(np.eye(4), vacuum(1), 1)
    if kind == "lossy":
        return ChannelDilation(sp.beam_splitter(p["eta"]), vacuum(1), 1)
    if kind == "thermal_noise":
        env = _purified_thermal(p["c"])
        S = sp.direct_sum(sp.beam_splitter(p["eta"]), np.eye(2))
        return ChannelDilation(S, env, 1)
    if kind == "amplifier":
        S_amp = sp.two_mode_squeezer(math.acosh(math.sqrt(p["eta"])))
        if p.get("c", 1.0) == 1.0:
            return ChannelDilation(S_amp, vacuum(1), 1)
        env = _purified_thermal(p["c"])
        return ChannelDilation(sp.direct_sum(S_amp, np.eye(2)), env, 1)
    if kind == "classical_noise" and T.n == 1:
        Y = T.Y
        y = Y[0, 0]
        if not np.allclose(Y, y * np.eye(2), atol=1e-12):
            raise UnsupportedChannelError("classical-noise dilation needs isotropic Y = y I")
        if y == 0:
            return ChannelDilation(np.eye(4), vacuum(1), 1)
        eta = 2.0 / (2.0 + y)
        bs = sp.embed(sp.beam_splitter(eta), [0, 1], 3)
        amp = sp.embed(sp.two_mode_squeezer(math.acosh(math.sqrt(1.0 / eta))), [0, 2], 3)
        return ChannelDilation(amp @ bs, vacuum(2), 1)
    raise UnsupportedChannelError(f"no dilation available for channel family {kind!r}")


def _purified_thermal(c: float) -> GaussianState:
    # sinh^2 r = N makes each half thermal with covariance c I
    return two_mode_squeezed_state(math.asinh(math.sqrt(0.5 * (c - 1.0))))
