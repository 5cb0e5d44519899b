"""Domain types and pure signal-model functions for a simultaneously
transmitting and reflecting surface serving one user on each side.

Every element m splits the incident signal into a transmitted part,
scaled by sqrt(beta_t[m]) * exp(j*theta_t[m]), and a reflected part,
scaled by sqrt(1 - beta_t[m]) * exp(j*theta_r[m]).  Only the transmitted
energy fraction is stored, so the per-element energy balance
|T_m|^2 + |R_m|^2 = 1 holds by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * np.pi


class Protocol(Enum):
    """Operating modes of the surface and the two baseline architectures."""

    ENERGY_SPLITTING = "es"     # every element transmits and reflects
    MODE_SWITCHING = "ms"       # every element either transmits or reflects
    TIME_SWITCHING = "ts"       # whole surface alternates T and R over time
    CONVENTIONAL_SPLIT = "conventional"  # fixed half reflect-only, half transmit-only
    OMNI_COUPLED = "omni"       # equal split, shared phase for both sides

    def __str__(self) -> str:
        return self.value


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


def canonical_phase(theta) -> np.ndarray:
    """Wrap phases into [0, 2*pi)."""
    return np.mod(np.asarray(theta, dtype=float), TWO_PI)


@dataclass(frozen=True)
class StarCoefficients:
    """Per-element transmission/reflection amplitudes and phases.

    beta_t[m] is the transmitted energy fraction in [0, 1]; the reflected
    fraction is always 1 - beta_t[m] and is never stored separately.
    Phases are canonicalized to [0, 2*pi) on construction.
    """

    beta_t: np.ndarray
    theta_t: np.ndarray
    theta_r: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta_t, dtype=float)
        if beta.ndim != 1 or beta.size == 0:
            raise ValueError("beta_t must be a non-empty 1-D vector")
        if not np.all(np.isfinite(beta)) or np.any(beta < 0.0) or np.any(beta > 1.0):
            raise ValueError("beta_t entries must be finite and in [0, 1]")
        th_t = np.asarray(self.theta_t, dtype=float)
        th_r = np.asarray(self.theta_r, dtype=float)
        if th_t.shape != beta.shape or th_r.shape != beta.shape:
            raise ValueError("theta_t and theta_r must match beta_t in shape")
        if not (np.all(np.isfinite(th_t)) and np.all(np.isfinite(th_r))):
            raise ValueError("phases must be finite")
        object.__setattr__(self, "beta_t", _readonly(beta))
        object.__setattr__(self, "theta_t", _readonly(canonical_phase(th_t)))
        object.__setattr__(self, "theta_r", _readonly(canonical_phase(th_r)))

    @property
    def m_elements(self) -> int:
        return self.beta_t.size

    @property
    def beta_r(self) -> np.ndarray:
        """Reflected energy fraction, derived so conservation is exact."""
        return 1.0 - self.beta_t

    def transmission_coeffs(self) -> np.ndarray:
        """Complex per-element coefficients applied to the transmitted signal."""
        return np.sqrt(self.beta_t) * np.exp(1j * self.theta_t)

    def reflection_coeffs(self) -> np.ndarray:
        return np.sqrt(self.beta_r) * np.exp(1j * self.theta_r)

    @classmethod
    def full_transmission(cls, m: int, theta_t=None) -> "StarCoefficients":
        """All energy transmitted (the T period of time switching)."""
        th = np.zeros(m) if theta_t is None else theta_t
        return cls(np.ones(m), th, np.zeros(m))

    @classmethod
    def full_reflection(cls, m: int, theta_r=None) -> "StarCoefficients":
        """All energy reflected (the R period of time switching)."""
        th = np.zeros(m) if theta_r is None else theta_r
        return cls(np.zeros(m), np.zeros(m), th)


@dataclass(frozen=True)
class Unicast:
    """Independent messages: per-user rate targets in bit/s/Hz."""

    rate_t: float
    rate_r: float

    def __post_init__(self):
        if self.rate_t < 0.0 or self.rate_r < 0.0:
            raise ValueError("rate targets must be >= 0")


@dataclass(frozen=True)
class Multicast:
    """One common message, same rate target for both users in bit/s/Hz."""

    rate: float

    def __post_init__(self):
        if self.rate < 0.0:
            raise ValueError("rate target must be >= 0")


Scenario = Unicast | Multicast


@dataclass(frozen=True)
class EffectiveChannels:
    """Cascaded AP-to-user channels seen through the surface."""

    h_t: np.ndarray
    h_r: np.ndarray

    def __post_init__(self):
        h_t = np.asarray(self.h_t, dtype=complex)
        h_r = np.asarray(self.h_r, dtype=complex)
        if h_t.shape != h_r.shape or h_t.ndim != 1:
            raise ValueError("h_t and h_r must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(h_t)) and np.all(np.isfinite(h_r))):
            raise ValueError("effective channels must be finite")
        object.__setattr__(self, "h_t", h_t)
        object.__setattr__(self, "h_r", h_r)


def effective_channel(G: np.ndarray, v: np.ndarray, coeff_amp, coeff_phase) -> np.ndarray:
    """Compose the cascaded channel through the surface.

    Element m applies sqrt(coeff_amp[m]) * exp(j*coeff_phase[m]) to the
    signal it passes on; the returned length-N vector is

        h[n] = sum_m conj(G[m, n]) * sqrt(coeff_amp[m])
                     * exp(-1j * coeff_phase[m]) * conj(v[m])

    Args:
        G: complex (M, N) AP-to-surface matrix.
        v: complex (M,) surface-to-user vector.
        coeff_amp: (M,) energy fractions in [0, 1].
        coeff_phase: (M,) phases in radians.

    Returns:
        complex (N,) effective channel.
    """
    G = np.asarray(G, dtype=complex)
    v = np.asarray(v, dtype=complex)
    amp = np.asarray(coeff_amp, dtype=float)
    phase = np.asarray(coeff_phase, dtype=float)
    if G.ndim != 2:
        raise ValueError("G must be a 2-D (M, N) matrix")
    m = G.shape[0]
    if v.shape != (m,) or amp.shape != (m,) or phase.shape != (m,):
        raise ValueError("v, coeff_amp and coeff_phase must be (M,) vectors")
    if np.any(amp < 0.0) or np.any(amp > 1.0):
        raise ValueError("coeff_amp entries must lie in [0, 1]")
    u_conj = np.sqrt(amp) * np.exp(-1j * phase)
    return G.conj().T @ (u_conj * v.conj())


def star_effective_channels(G, v_t, v_r, coeffs: StarCoefficients) -> EffectiveChannels:
    """Effective channels to the transmission-side and reflection-side users."""
    h_t = effective_channel(G, v_t, coeffs.beta_t, coeffs.theta_t)
    h_r = effective_channel(G, v_r, coeffs.beta_r, coeffs.theta_r)
    return EffectiveChannels(h_t, h_r)


def rate_to_sinr(rate: float) -> float:
    """Linear SINR target for a spectral-efficiency target in bit/s/Hz."""
    if rate < 0.0:
        raise ValueError("rate must be >= 0")
    return float(2.0 ** rate - 1.0)


def unicast_sinrs(h_t, h_r, w_t, w_r, sigma2: float) -> tuple[float, float]:
    """Achieved SINRs when each user decodes its own precoded stream.

    SINR_k = |h_k^H w_k|^2 / (|h_k^H w_j|^2 + sigma2) for j != k.
    """
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be > 0")
    h_t = np.asarray(h_t, dtype=complex)
    h_r = np.asarray(h_r, dtype=complex)
    w_t = np.asarray(w_t, dtype=complex)
    w_r = np.asarray(w_r, dtype=complex)
    if not (h_t.shape == h_r.shape == w_t.shape == w_r.shape):
        raise ValueError("channel and precoder vectors must share one shape")
    s_tt = abs(np.vdot(h_t, w_t)) ** 2
    s_tr = abs(np.vdot(h_t, w_r)) ** 2
    s_rr = abs(np.vdot(h_r, w_r)) ** 2
    s_rt = abs(np.vdot(h_r, w_t)) ** 2
    return s_tt / (s_tr + sigma2), s_rr / (s_rt + sigma2)


def multicast_snrs(h_t, h_r, w, sigma2: float) -> tuple[float, float]:
    """Per-user SNRs of one common precoded stream: |h_k^H w|^2 / sigma2."""
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be > 0")
    h_t = np.asarray(h_t, dtype=complex)
    h_r = np.asarray(h_r, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if not (h_t.shape == h_r.shape == w.shape):
        raise ValueError("channel and precoder vectors must share one shape")
    return abs(np.vdot(h_t, w)) ** 2 / sigma2, abs(np.vdot(h_r, w)) ** 2 / sigma2


def coefficients_satisfy(protocol: Protocol, coeffs, atol: float = 0.0) -> bool:
    """Check that a coefficient set lies in the feasible set of a protocol.

    For TIME_SWITCHING pass a (t_period, r_period) pair of StarCoefficients;
    for all other protocols pass a single StarCoefficients.  atol loosens the
    amplitude checks (0 demands exact grid values, the construction default).
    """
    if protocol is Protocol.TIME_SWITCHING:
        t_set, r_set = coeffs
        return bool(
            np.all(np.abs(t_set.beta_t - 1.0) <= atol)
            and np.all(np.abs(r_set.beta_t) <= atol)
        )
    beta = coeffs.beta_t
    if protocol is Protocol.ENERGY_SPLITTING:
        return True  # any valid StarCoefficients qualifies
    if protocol is Protocol.MODE_SWITCHING:
        return bool(np.all(np.minimum(np.abs(beta), np.abs(beta - 1.0)) <= atol))
    if protocol is Protocol.CONVENTIONAL_SPLIT:
        m = beta.size
        if m % 2 != 0:
            return False
        half = m // 2
        return bool(
            np.all(np.abs(beta[:half]) <= atol)
            and np.all(np.abs(beta[half:] - 1.0) <= atol)
        )
    if protocol is Protocol.OMNI_COUPLED:
        return bool(
            np.all(np.abs(beta - 0.5) <= atol)
            and np.all(coeffs.theta_t == coeffs.theta_r)
        )
    raise ValueError(f"unknown protocol: {protocol!r}")
