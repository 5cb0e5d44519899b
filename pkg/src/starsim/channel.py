"""Geometry, path loss, and seeded Rician fading for the two-hop links.

Direct AP-user paths are blocked; the only links are AP -> surface and
surface -> user on each side.  The surface occupies the plane through
ris_pos perpendicular to the x axis: the AP and the reflection-side user
must sit on one side of that plane (x < ris_x for the default layout) and
the transmission-side user on the other.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (2,):
        raise ValueError("positions must be 2-D (x, y) coordinates in meters")
    return a


@dataclass(frozen=True)
class Geometry:
    """Planar node placement in meters."""

    ap_pos: tuple[float, float] = (0.0, 0.0)
    ris_pos: tuple[float, float] = (50.0, 0.0)
    user_t_pos: tuple[float, float] = (53.0, 0.0)
    user_r_pos: tuple[float, float] = (47.0, 2.0)

    def __post_init__(self):
        ap = _as_point(self.ap_pos)
        ris = _as_point(self.ris_pos)
        ut = _as_point(self.user_t_pos)
        ur = _as_point(self.user_r_pos)
        object.__setattr__(self, "ap_pos", tuple(ap))
        object.__setattr__(self, "ris_pos", tuple(ris))
        object.__setattr__(self, "user_t_pos", tuple(ut))
        object.__setattr__(self, "user_r_pos", tuple(ur))
        # side of the surface plane = sign of the x offset from the surface
        side_t = np.sign(ut[0] - ris[0])
        side_r = np.sign(ur[0] - ris[0])
        side_ap = np.sign(ap[0] - ris[0])
        if side_t == 0.0 or side_r == 0.0 or side_t == side_r:
            raise ValueError("users must lie on opposite sides of the surface plane")
        if side_ap != side_r:
            raise ValueError("the AP must share the reflection-side half-space")
        for a, b in ((ap, ris), (ris, ut), (ris, ur), (ap, ut), (ap, ur), (ut, ur)):
            if np.linalg.norm(a - b) <= 0.0:
                raise ValueError("all pairwise distances must be > 0")

    def d_ap_ris(self) -> float:
        return float(np.linalg.norm(np.subtract(self.ap_pos, self.ris_pos)))

    def d_ris_user_t(self) -> float:
        return float(np.linalg.norm(np.subtract(self.ris_pos, self.user_t_pos)))

    def d_ris_user_r(self) -> float:
        return float(np.linalg.norm(np.subtract(self.ris_pos, self.user_r_pos)))


@dataclass(frozen=True)
class FadingParams:
    """Large- and small-scale fading constants.

    c0_db is the path gain at 1 m; rician_k is the linear LoS/NLoS power
    ratio; noise_dbm the receiver noise power.  All overridable via the
    sweep config so experiments pin them explicitly.
    """

    pathloss_exponent: float = 2.2
    c0_db: float = -30.0
    rician_k: float = 1.0
    noise_dbm: float = -90.0

    def __post_init__(self):
        if self.pathloss_exponent <= 0.0:
            raise ValueError("pathloss_exponent must be > 0")
        if self.rician_k < 0.0:
            raise ValueError("rician_k must be >= 0")

    @property
    def sigma2_w(self) -> float:
        """Noise power in Watts."""
        return dbm_to_watts(self.noise_dbm)


@dataclass(frozen=True)
class ChannelSet:
    """One fading realization of all links plus the noise power."""

    G: np.ndarray       # (M, N) AP -> surface
    v_t: np.ndarray     # (M,) surface -> transmission-side user
    v_r: np.ndarray     # (M,) surface -> reflection-side user
    sigma2: float       # Watts

    def __post_init__(self):
        G = np.asarray(self.G, dtype=complex)
        v_t = np.asarray(self.v_t, dtype=complex)
        v_r = np.asarray(self.v_r, dtype=complex)
        if G.ndim != 2:
            raise ValueError("G must be (M, N)")
        m = G.shape[0]
        if v_t.shape != (m,) or v_r.shape != (m,):
            raise ValueError("v_t and v_r must be (M,) vectors")
        for a in (G, v_t, v_r):
            if not np.all(np.isfinite(a)):
                raise ValueError("channel entries must be finite")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0.0):
            raise ValueError("sigma2 must be a positive finite power in Watts")
        for a in (G, v_t, v_r):
            a.flags.writeable = False
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "v_t", v_t)
        object.__setattr__(self, "v_r", v_r)

    @property
    def m_elements(self) -> int:
        return self.G.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.G.shape[1]

    def digest(self) -> str:
        """Stable hex hash of the realization, for paired-channel checks."""
        h = hashlib.blake2b(digest_size=8)
        for a in (self.G, self.v_t, self.v_r):
            h.update(np.ascontiguousarray(a).tobytes())
        h.update(np.float64(self.sigma2).tobytes())
        return h.hexdigest()


def dbm_to_watts(p_dbm: float) -> float:
    return float(10.0 ** ((p_dbm - 30.0) / 10.0))


def watts_to_dbm(p_w: float) -> float:
    return float(10.0 * np.log10(p_w) + 30.0)


def path_loss_linear(distance: float, params: FadingParams) -> float:
    """Linear power gain of one hop: 10^(c0_db/10) * distance^-alpha."""
    if distance <= 0.0:
        raise ValueError("distance must be > 0")
    return float(10.0 ** (params.c0_db / 10.0) * distance ** (-params.pathloss_exponent))


LOS_ONLY_K = 1e12   # at and beyond this ratio the scattered part is dropped


def _rician_link(gain: float, k: float, shape, rng: np.random.Generator) -> np.ndarray:
    """One link matrix: sqrt(gain) Rician sample with an all-ones LoS term.

    Draws the scattered real parts then the imaginary parts from rng, each
    standard normal, so a fixed seed pins the realization bit-for-bit.
    K >= LOS_ONLY_K is treated as the deterministic LoS-only limit.
    """
    los = np.ones(shape, dtype=complex)
    if k >= LOS_ONLY_K:
        return np.sqrt(gain) * los
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    nlos = (re + 1j * im) / np.sqrt(2.0)
    return np.sqrt(gain) * (np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * nlos)


def generate_channel_set(
    geometry: Geometry,
    params: FadingParams,
    m_elements: int,
    n_antennas: int = 2,
    seed: int = 0,
) -> ChannelSet:
    """Draw one seeded fading realization of all three links.

    Randomness comes from a Philox counter-based generator keyed by the
    64-bit seed, with a fixed draw order (G, then v_t, then v_r; real
    parts before imaginary parts within each link), so identical seeds
    reproduce identical channels on any worker.
    """
    if m_elements < 1 or n_antennas < 1:
        raise ValueError("m_elements and n_antennas must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    k = params.rician_k
    g_ap = path_loss_linear(geometry.d_ap_ris(), params)
    g_t = path_loss_linear(geometry.d_ris_user_t(), params)
    g_r = path_loss_linear(geometry.d_ris_user_r(), params)
    G = _rician_link(g_ap, k, (m_elements, n_antennas), rng)
    v_t = _rician_link(g_t, k, (m_elements,), rng)
    v_r = _rician_link(g_r, k, (m_elements,), rng)
    return ChannelSet(G=G, v_t=v_t, v_r=v_r, sigma2=params.sigma2_w)
