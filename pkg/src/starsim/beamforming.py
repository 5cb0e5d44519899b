"""Minimum-power transmit beamforming for fixed effective channels.

Three solvers: a single-user closed form, a two-user unicast solver based
on an uplink-downlink duality fixed point, and a two-user multicast solver
based on candidate enumeration inside span{h_t, h_r}.

The unicast and multicast problems reduce to three real statistics of the
channel pair, a = ||h_t||^2, b = ||h_r||^2 and d = h_t^H h_r, so both
solvers sit on vectorized scalar kernels over those statistics.  The outer
coefficient optimizers score large candidate batches through the same
kernels; each batch entry is solved independently, so a score never
depends on what else is in the batch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

Q_CAP_DEFAULT = 1e12     # virtual uplink power beyond which we declare infeasibility
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Infeasible(Exception):
    """The rate targets cannot be met on the given channels."""


class NonConvergence(Exception):
    """The fixed-point iteration hit its iteration cap without converging."""


@dataclass(frozen=True)
class UnicastSolution:
    """Precoders and minimum transmit power for two independent streams."""

    w_t: np.ndarray
    w_r: np.ndarray
    power_w: float
    iterations: int


@dataclass(frozen=True)
class MulticastSolution:
    """Common-stream precoder and its transmit power."""

    w: np.ndarray
    power_w: float


def golden_section_min(f, lo, hi, tol):
    """Golden-section minimization of a unimodal function on [lo, hi].

    Works elementwise: lo/hi may be arrays and f must map arrays to arrays.
    Returns the interval midpoint once every interval is shorter than tol.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    while np.max(hi - lo) > tol:
        c = hi - (hi - lo) * _INV_GOLDEN
        d = lo + (hi - lo) * _INV_GOLDEN
        shrink_hi = f(c) < f(d)
        hi = np.where(shrink_hi, d, hi)
        lo = np.where(shrink_hi, lo, c)
    mid = (lo + hi) / 2.0
    return float(mid) if mid.ndim == 0 else mid


def pair_stats(h_t: np.ndarray, h_r: np.ndarray):
    """(||h_t||^2, ||h_r||^2, h_t^H h_r) along the last axis."""
    h_t = np.asarray(h_t, dtype=complex)
    h_r = np.asarray(h_r, dtype=complex)
    a = np.sum(h_t.real ** 2 + h_t.imag ** 2, axis=-1)
    b = np.sum(h_r.real ** 2 + h_r.imag ** 2, axis=-1)
    d = np.sum(h_t.conj() * h_r, axis=-1)
    return a, b, d


@numba.njit(cache=True)
def _unicast_kernel(a, b, c, gamma_t, gamma_r, sigma2, tol, max_iter, q_cap,
                    power, q_t, q_r, status, iters):  # pragma: no cover - jitted
    for i in range(a.size):
        ai = a[i]
        bi = b[i]
        det = ai * bi - c[i]
        a_s2 = ai * sigma2
        b_s2 = bi * sigma2
        gt_s2 = gamma_t * sigma2
        gr_s2 = gamma_r * sigma2
        qt = 0.0
        qr = 0.0
        st = 2  # 0 converged, 1 infeasible, 2 iteration cap
        it = 0
        while it < max_iter:
            it += 1
            # update the T user, then the R user with the fresh value;
            # the quadratic forms collapse to scalars via the rank-one
            # inversion identity: h_t^H (s I + q h_r h_r^H)^-1 h_t
            #   = (a*s + q*(a*b - c)) / (s * (s + q*b)) with s = sigma2
            if gamma_t == 0.0:
                nt = 0.0
            else:
                denom = a_s2 + qr * det
                if denom <= 0.0:
                    st = 1
                    break
                nt = gt_s2 * (sigma2 + qr * bi) / denom
            if gamma_r == 0.0:
                nr = 0.0
            else:
                denom = b_s2 + nt * det
                if denom <= 0.0:
                    st = 1
                    break
                nr = gr_s2 * (sigma2 + nt * ai) / denom
            if nt > q_cap or nr > q_cap:
                qt = nt
                qr = nr
                st = 1
                break
            dt = abs(nt - qt)
            dr = abs(nr - qr)
            qt = nt
            qr = nr
            ft = qt if qt > 1e-300 else 1e-300
            fr = qr if qr > 1e-300 else 1e-300
            if dt < tol * ft and dr < tol * fr:
                st = 0
                break
        q_t[i] = qt
        q_r[i] = qr
        status[i] = st
        iters[i] = it
        power[i] = qt + qr if st == 0 else np.inf


def unicast_power_core(
    a, b, c, gamma_t: float, gamma_r: float, sigma2: float,
    tol: float = 1e-10, max_iter: int = 500, q_cap: float = Q_CAP_DEFAULT,
):
    """Vectorized duality fixed point on the virtual uplink powers.

    a, b are the squared channel norms, c = |h_t^H h_r|^2.  Iterates

        q_t <- gamma_t / (h_t^H (sigma2 I + q_r h_r h_r^H)^-1 h_t)
        q_r <- gamma_r / (h_r^H (sigma2 I + q_t h_t h_t^H)^-1 h_r)

    from q = 0 until the max relative change drops below tol; at the fixed
    point the minimum downlink sum power equals q_t + q_r.

    Returns (power, q_t, q_r, status, iterations) broadcast over the
    inputs; power is +inf where a q escaped past q_cap or the channel
    cannot support the target (status 1) or max_iter was reached (status 2).
    """
    a, b, c = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(c, dtype=float)
    )
    shape = a.shape
    flat_a = np.ascontiguousarray(a, dtype=np.float64).ravel()
    flat_b = np.ascontiguousarray(b, dtype=np.float64).ravel()
    flat_c = np.ascontiguousarray(c, dtype=np.float64).ravel()
    n = flat_a.size
    power = np.empty(n)
    q_t = np.empty(n)
    q_r = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    iters = np.empty(n, dtype=np.int64)
    _unicast_kernel(flat_a, flat_b, flat_c, float(gamma_t), float(gamma_r),
                    float(sigma2), float(tol), int(max_iter), float(q_cap),
                    power, q_t, q_r, status, iters)
    return (power.reshape(shape), q_t.reshape(shape), q_r.reshape(shape),
            status.reshape(shape), iters.reshape(shape))


@numba.njit(cache=True)
def _multicast_kernel(a, b, d_re, d_im, gamma, sigma2,
                      par_rtol, power, branch, phi_out):  # pragma: no cover - jitted
    gs = gamma * sigma2
    two_pi = 2.0 * np.pi
    for i in range(a.size):
        ai = a[i]
        bi = b[i]
        if ai == 0.0 or bi == 0.0:
            power[i] = np.inf
            branch[i] = -1
            phi_out[i] = 0.0
            continue
        dr = d_re[i]
        di = d_im[i]
        c = dr * dr + di * di
        best = np.inf
        br = -1
        phi = 0.0
        if c >= ai * ai:          # matched filter to h_t also covers user r
            best = gs / ai
            br = 0
        if c >= bi * bi:
            p = gs / bi
            if p < best:
                best = p
                br = 1
        det = ai * bi - c
        if det <= par_rtol * ai * bi:
            p = gs / min(ai, bi)  # parallel channels: one effective constraint
            if p < best:
                best = p
                br = 3
        else:
            # both-constraints-tight family: power is
            # gs * (a + b - 2 Re(d e^{j phi})) / det, a pure sinusoid in
            # phi, so the phase-grid scan plus golden-section refinement
            # land on its closed-form minimizer phi = -arg(d); evaluate
            # that limit directly (a dense-grid oracle cross-checks this
            # in the tests)
            ph = -math.atan2(di, dr)
            if ph < 0.0:
                ph += two_pi
            p = gs * ((ai + bi) - 2.0 * math.sqrt(c)) / det
            if p < best:
                best = p
                br = 2
                phi = ph
        power[i] = best
        branch[i] = br
        phi_out[i] = phi


def multicast_power_core(
    a, b, d, gamma: float, sigma2: float,
    phase_grid: int = 360, parallel_rtol: float = 1e-12,
):
    """Vectorized minimum power for one common stream and two SNR targets.

    Candidates: matched filter to either user (kept when the other user's
    SNR also clears gamma) and the both-constraints-tight family
    w(phi) = H (H^H H)^-1 [sqrt(gamma*sigma2), sqrt(gamma*sigma2) e^{j phi}]^T.
    Its power gamma*sigma2*(a + b - 2 Re(d e^{j phi})) / (a*b - |d|^2) is a
    pure sinusoid in phi, so the phase-grid scan (nominally phase_grid
    points) followed by golden-section refinement converges to the
    closed-form minimizer phi = -arg(d), which the kernel evaluates
    directly.  Nearly parallel channel pairs fall back to serving the
    weaker channel alone.

    Returns (power, branch, phi) with branch 0 = MRT to h_t, 1 = MRT to
    h_r, 2 = both constraints tight, 3 = parallel fallback; power is +inf
    (branch -1) where a zero channel meets a positive target.
    """
    a, b, d = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(d, dtype=complex)
    )
    shape = a.shape
    flat_a = np.ascontiguousarray(a, dtype=np.float64).ravel()
    flat_b = np.ascontiguousarray(b, dtype=np.float64).ravel()
    d_flat = np.ascontiguousarray(d, dtype=np.complex128).ravel()
    n = flat_a.size
    power = np.empty(n)
    branch = np.empty(n, dtype=np.int64)
    phi = np.empty(n)
    if gamma == 0.0:
        return np.zeros(shape), np.zeros(shape, dtype=np.int64), np.zeros(shape)
    _multicast_kernel(flat_a, flat_b, np.ascontiguousarray(d_flat.real),
                      np.ascontiguousarray(d_flat.imag), float(gamma), float(sigma2),
                      float(parallel_rtol), power, branch, phi)
    return power.reshape(shape), branch.reshape(shape), phi.reshape(shape)


def single_user_min_power(h: np.ndarray, gamma: float, sigma2: float):
    """Matched-filter minimum power for one user: P = gamma*sigma2/||h||^2.

    Returns (w, power_w).
    """
    if gamma < 0.0:
        raise ValueError("gamma must be >= 0")
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be > 0")
    h = np.asarray(h, dtype=complex)
    if gamma == 0.0:
        return np.zeros_like(h), 0.0
    norm2 = float(np.sum(h.real ** 2 + h.imag ** 2))
    if norm2 == 0.0:
        raise Infeasible("positive SNR target on a zero channel")
    power = gamma * sigma2 / norm2
    w = np.sqrt(power) * h / np.sqrt(norm2)
    return w, float(power)


def unicast_min_power(
    h_t, h_r, gamma_t: float, gamma_r: float, sigma2: float,
    tol: float = 1e-10, max_iter: int = 500,
) -> UnicastSolution:
    """Minimum sum power meeting both per-user SINR targets.

    The duality fixed point yields virtual uplink powers, the beamformer
    directions are the regularized channel inverses
    u_k = normalize((sigma2 I + sum_j q_j h_j h_j^H)^-1 h_k), and the
    downlink powers follow from making both SINR constraints tight.

    Raises Infeasible when a virtual power escapes the cap or a downlink
    power comes out negative, NonConvergence at the iteration cap.
    """
    if gamma_t < 0.0 or gamma_r < 0.0:
        raise ValueError("SINR targets must be >= 0")
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be > 0")
    h_t = np.asarray(h_t, dtype=complex)
    h_r = np.asarray(h_r, dtype=complex)
    if h_t.shape != h_r.shape or h_t.ndim != 1:
        raise ValueError("h_t and h_r must be 1-D vectors of equal length")
    n = h_t.size
    zeros = np.zeros(n, dtype=complex)

    if gamma_t == 0.0 and gamma_r == 0.0:
        return UnicastSolution(zeros, zeros.copy(), 0.0, 0)
    if gamma_r == 0.0:
        w_t, p = single_user_min_power(h_t, gamma_t, sigma2)
        return UnicastSolution(w_t, zeros, p, 0)
    if gamma_t == 0.0:
        w_r, p = single_user_min_power(h_r, gamma_r, sigma2)
        return UnicastSolution(zeros, w_r, p, 0)

    a, b, d = pair_stats(h_t, h_r)
    c = float(d.real ** 2 + d.imag ** 2)
    _, q_t, q_r, status, iters = unicast_power_core(
        float(a), float(b), c, gamma_t, gamma_r, sigma2, tol=tol, max_iter=max_iter
    )
    if int(status) == 1:
        raise Infeasible("virtual uplink power exceeded the feasibility cap")
    if int(status) == 2:
        raise NonConvergence(f"fixed point not converged after {max_iter} iterations")

    A = sigma2 * np.eye(n, dtype=complex)
    A += float(q_t) * np.outer(h_t, h_t.conj())
    A += float(q_r) * np.outer(h_r, h_r.conj())
    x_t = np.linalg.solve(A, h_t)
    x_r = np.linalg.solve(A, h_r)
    u_t = x_t / np.linalg.norm(x_t)
    u_r = x_r / np.linalg.norm(x_r)

    g_tt = abs(np.vdot(h_t, u_t)) ** 2
    g_tr = abs(np.vdot(h_t, u_r)) ** 2
    g_rr = abs(np.vdot(h_r, u_r)) ** 2
    g_rt = abs(np.vdot(h_r, u_t)) ** 2
    lhs = np.array([[g_tt, -gamma_t * g_tr], [-gamma_r * g_rt, g_rr]])
    rhs = np.array([gamma_t * sigma2, gamma_r * sigma2])
    try:
        p = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise Infeasible("singular downlink power system") from exc
    if np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise Infeasible("negative downlink power")
    w_t = np.sqrt(p[0]) * u_t
    w_r = np.sqrt(p[1]) * u_r
    total = float(np.sum(np.abs(w_t) ** 2) + np.sum(np.abs(w_r) ** 2))
    return UnicastSolution(w_t, w_r, total, int(iters))


def multicast_min_power(
    h_t, h_r, gamma: float, sigma2: float, phase_grid: int = 360
) -> MulticastSolution:
    """Minimum power for one common stream meeting both SNR targets."""
    if gamma < 0.0:
        raise ValueError("gamma must be >= 0")
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be > 0")
    if phase_grid < 8:
        raise ValueError("phase_grid must be >= 8")
    h_t = np.asarray(h_t, dtype=complex)
    h_r = np.asarray(h_r, dtype=complex)
    if h_t.shape != h_r.shape or h_t.ndim != 1:
        raise ValueError("h_t and h_r must be 1-D vectors of equal length")
    if gamma == 0.0:
        return MulticastSolution(np.zeros_like(h_t), 0.0)

    a, b, d = pair_stats(h_t, h_r)
    a, b, d = float(a), float(b), complex(d)
    if a == 0.0 or b == 0.0:
        raise Infeasible("positive SNR target on a zero channel")
    power, branch, phi = multicast_power_core(a, b, d, gamma, sigma2, phase_grid)
    branch = int(branch)
    gs = gamma * sigma2
    if branch == 0:
        w = np.sqrt(gs / a) * h_t / np.sqrt(a)
    elif branch == 1:
        w = np.sqrt(gs / b) * h_r / np.sqrt(b)
    elif branch == 3:
        h_weak, norm2 = (h_t, a) if a <= b else (h_r, b)
        w = np.sqrt(gs / norm2) * h_weak / np.sqrt(norm2)
    else:
        det = a * b - abs(d) ** 2
        rhs = np.array([np.sqrt(gs), np.sqrt(gs) * np.exp(1j * float(phi))])
        coef = np.array([[b, -d], [-np.conj(d), a]], dtype=complex) @ rhs / det
        w = coef[0] * h_t + coef[1] * h_r
    return MulticastSolution(w, float(np.sum(np.abs(w) ** 2)))
