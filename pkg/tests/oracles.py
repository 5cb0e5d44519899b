"""Independent brute-force oracles used to pin expected values.

Everything here deliberately avoids the library's solution paths: channel
composition is a naive triple loop, the unicast oracle greets the problem
with an exhaustive direction grid, and the multicast/time-split oracles
are dense one-dimensional scans.
"""
from __future__ import annotations

import cmath

import numpy as np


def effective_channel_loops(G, v, amp, phase):
    """Naive per-entry summation of the cascaded channel."""
    G = np.asarray(G, dtype=complex)
    v = np.asarray(v, dtype=complex)
    m, n = G.shape
    h = np.zeros(n, dtype=complex)
    for col in range(n):
        acc = 0j
        for row in range(m):
            coeff = cmath.sqrt(amp[row]) * cmath.exp(-1j * phase[row])
            acc += G[row, col].conjugate() * coeff * v[row].conjugate()
        h[col] = acc
    return h


def _direction_set(h_t, h_r, alphas, phis):
    """Unit vectors cos(a)*e1 + sin(a)*e^{j p}*e2 spanning span{h_t, h_r}.

    Returns the inner products (h_t^H u, h_r^H u) for every (alpha, phi)
    combination, flattened.
    """
    e1 = h_t / np.linalg.norm(h_t)
    res = h_r - np.vdot(e1, h_r) * e1
    nres = np.linalg.norm(res)
    if nres > 1e-14 * np.linalg.norm(h_r):
        e2 = res / nres
    else:  # parallel channels: pick any orthogonal completion
        probe = np.zeros_like(h_t)
        probe[0] = 1.0
        res = probe - np.vdot(e1, probe) * e1
        if np.linalg.norm(res) < 1e-12:
            probe = np.zeros_like(h_t)
            probe[1] = 1.0
            res = probe - np.vdot(e1, probe) * e1
        e2 = res / np.linalg.norm(res)
    ca, sa = np.cos(alphas)[:, None], np.sin(alphas)[:, None]
    ph = np.exp(1j * phis)[None, :]
    t1, t2 = np.vdot(h_t, e1), np.vdot(h_t, e2)
    r1, r2 = np.vdot(h_r, e1), np.vdot(h_r, e2)
    ip_t = (np.conj(t1) * ca + np.conj(t2) * sa * ph).ravel()
    ip_r = (np.conj(r1) * ca + np.conj(r2) * sa * ph).ravel()
    return ip_t, ip_r


def unicast_oracle_span(
    h_t, h_r, gamma_t, gamma_r, sigma2,
    n_alpha=13, n_phi=24, refine_rounds=3, zoom=4.0,
):
    """Exhaustive direction-grid minimum power for the two-user problem.

    Both precoders are searched over unit directions in span{h_t, h_r};
    for each direction pair the powers making both SINR constraints tight
    follow from a 2x2 linear system.  The best cell is re-gridded
    refine_rounds times.  Returns the minimum total power.
    """
    h_t = np.asarray(h_t, dtype=complex)
    h_r = np.asarray(h_r, dtype=complex)
    a_lo, a_hi = 0.0, np.pi / 2.0
    p_lo, p_hi = 0.0, 2.0 * np.pi
    windows = [(a_lo, a_hi, p_lo, p_hi), (a_lo, a_hi, p_lo, p_hi)]
    best_power = np.inf
    for _ in range(refine_rounds + 1):
        (ta0, ta1, tp0, tp1), (ra0, ra1, rp0, rp1) = windows
        alphas_t = np.linspace(ta0, ta1, n_alpha)
        phis_t = np.linspace(tp0, tp1, n_phi, endpoint=False)
        alphas_r = np.linspace(ra0, ra1, n_alpha)
        phis_r = np.linspace(rp0, rp1, n_phi, endpoint=False)
        tt, rt = _direction_set(h_t, h_r, alphas_t, phis_t)  # gains of w_t dirs
        tr, rr = _direction_set(h_t, h_r, alphas_r, phis_r)  # gains of w_r dirs
        g_tt = (np.abs(tt) ** 2)[:, None]
        g_rt = (np.abs(rt) ** 2)[:, None]
        g_tr = (np.abs(tr) ** 2)[None, :]
        g_rr = (np.abs(rr) ** 2)[None, :]
        det = g_tt * g_rr - gamma_t * gamma_r * g_tr * g_rt
        with np.errstate(divide="ignore", invalid="ignore"):
            p_t = gamma_t * sigma2 * (g_rr + gamma_r * g_tr) / det
            p_r = gamma_r * sigma2 * (g_tt + gamma_t * g_rt) / det
            total = p_t + p_r
        total = np.where((det > 0) & (p_t >= 0) & (p_r >= 0), total, np.inf)
        flat = int(np.argmin(total))
        it, ir = np.unravel_index(flat, total.shape)
        best_power = min(best_power, float(total[it, ir]))
        ia_t, ip_t = np.unravel_index(it, (n_alpha, n_phi))
        ia_r, ip_r = np.unravel_index(ir, (n_alpha, n_phi))
        wa_t = (ta1 - ta0) / zoom
        wp_t = (tp1 - tp0) / zoom
        wa_r = (ra1 - ra0) / zoom
        wp_r = (rp1 - rp0) / zoom
        windows = [
            (alphas_t[ia_t] - wa_t / 2, alphas_t[ia_t] + wa_t / 2,
             phis_t[ip_t] - wp_t / 2, phis_t[ip_t] + wp_t / 2),
            (alphas_r[ia_r] - wa_r / 2, alphas_r[ia_r] + wa_r / 2,
             phis_r[ip_r] - wp_r / 2, phis_r[ip_r] + wp_r / 2),
        ]
    return best_power


def multicast_oracle_dense(h_t, h_r, gamma, sigma2, n_phi=4096):
    """Dense phase-grid minimum power for the common-stream problem.

    Evaluates the both-constraints-tight precoder explicitly for n_phi
    phases plus the two matched-filter candidates.
    """
    h_t = np.asarray(h_t, dtype=complex)
    h_r = np.asarray(h_r, dtype=complex)
    best = np.inf
    a = float(np.vdot(h_t, h_t).real)
    b = float(np.vdot(h_r, h_r).real)
    gs = gamma * sigma2
    w_mrt_t = np.sqrt(gs / a) * h_t / np.sqrt(a)
    if abs(np.vdot(h_r, w_mrt_t)) ** 2 >= gs * (1.0 - 1e-12):
        best = min(best, float(np.vdot(w_mrt_t, w_mrt_t).real))
    w_mrt_r = np.sqrt(gs / b) * h_r / np.sqrt(b)
    if abs(np.vdot(h_t, w_mrt_r)) ** 2 >= gs * (1.0 - 1e-12):
        best = min(best, float(np.vdot(w_mrt_r, w_mrt_r).real))
    H = np.stack([h_t, h_r], axis=1)
    B = H.conj().T @ H
    if abs(np.linalg.det(B)) > 1e-14 * a * b:
        phis = np.arange(n_phi) * (2.0 * np.pi / n_phi)
        rhs = np.stack(
            [np.full(n_phi, np.sqrt(gs), dtype=complex), np.sqrt(gs) * np.exp(1j * phis)],
            axis=1,
        )
        coef = np.linalg.solve(B[None, :, :], rhs[:, :, None])[:, :, 0]
        w = coef @ H.T  # (n_phi, N): w = coef0*h_t + coef1*h_r
        powers = np.sum(np.abs(w) ** 2, axis=1)
        best = min(best, float(np.min(powers)))
    else:
        best = min(best, gs / min(a, b))
    return best


def ts_oracle_lambda(g_t, g_r, rate_t, rate_r, sigma2, n=10_000, eps=1e-4):
    """Dense scan over the time split for the alternating-surface protocol."""
    lam = np.linspace(eps, 1.0 - eps, n)
    with np.errstate(over="ignore"):  # boundary splits overflow to inf
        p_t = (2.0 ** (rate_t / lam) - 1.0) * sigma2 / g_t if rate_t > 0 else np.zeros(n)
        p_r = (2.0 ** (rate_r / (1.0 - lam)) - 1.0) * sigma2 / g_r if rate_r > 0 else np.zeros(n)
        avg = lam * p_t + (1.0 - lam) * p_r
    i = int(np.argmin(avg))
    return float(lam[i]), float(avg[i])


def random_channel_pair(rng, n=2, scale=1.0):
    """One random complex channel pair for solver tests."""
    h_t = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    h_r = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    return h_t, h_r
