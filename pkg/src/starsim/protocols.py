"""Coefficient optimization for each operating protocol.

The inner beamforming problem is solved exactly for every candidate, and
the outer search over element coefficients is grid coordinate descent:
cycle over elements, exhaustively scan one coordinate at a time, accept
only strict improvements, and stop when a full sweep improves the power
by less than a dB threshold.

Scan scoring uses rank-one channel updates for speed, but every accepted
state and every recorded power is re-evaluated through one canonical path
(full channel composition + the vectorized inner core).  Because that
path is a pure function of the coefficients, warm-starting a protocol
with another protocol's solution makes the feasible-set nesting an exact
output inequality: the richer protocol can never end above its warm
start.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import (
    Infeasible,
    MulticastSolution,
    UnicastSolution,
    golden_section_min,
    multicast_min_power,
    multicast_power_core,
    pair_stats,
    single_user_min_power,
    unicast_min_power,
    unicast_power_core,
)
from .channel import ChannelSet
from .model import (
    Multicast,
    Protocol,
    Scenario,
    StarCoefficients,
    Unicast,
    effective_channel,
    rate_to_sinr,
)

ORACLE_SOLVE_LIMIT = 10_000_000


class RefusedSize(Exception):
    """Exhaustive enumeration would exceed the solve budget."""


@dataclass(frozen=True)
class GridSpec:
    """Search grids and stopping rules for the coordinate descent."""

    n_phase: int = 64
    n_amplitude: int = 21
    max_sweeps: int = 30
    improve_tol_db: float = 0.01
    restarts: int = 4

    def __post_init__(self):
        if self.n_phase < 4:
            raise ValueError("n_phase must be >= 4")
        if self.n_amplitude < 2:
            raise ValueError("n_amplitude must be >= 2 (endpoints 0 and 1)")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")

    def phase_grid(self) -> np.ndarray:
        return np.arange(self.n_phase) * (2.0 * np.pi / self.n_phase)

    def amplitude_grid(self) -> np.ndarray:
        # linspace keeps the endpoints exact, so on/off states are representable
        return np.linspace(0.0, 1.0, self.n_amplitude)


@dataclass
class SolveResult:
    """Optimized coefficients and the achieved minimum transmit power.

    For time switching, coefficients and beamformers are (T period,
    R period) pairs and lam is the fraction of time spent transmitting;
    power_w is then the time-averaged power.
    """

    coefficients: StarCoefficients | tuple[StarCoefficients, StarCoefficients]
    beamformers: object
    power_w: float
    objective_trace: list[float]
    converged: bool
    lam: float | None = None

    @property
    def sweeps_used(self) -> int:
        return len(self.objective_trace) - 1


@dataclass(frozen=True)
class TsAllocation:
    """Optimized time split and the per-period/average powers."""

    lam: float
    p_t: float
    p_r: float
    p_avg: float


def _scenario_targets(scenario: Scenario) -> tuple[str, float, float]:
    if isinstance(scenario, Unicast):
        return "unicast", rate_to_sinr(scenario.rate_t), rate_to_sinr(scenario.rate_r)
    if isinstance(scenario, Multicast):
        g = rate_to_sinr(scenario.rate)
        return "multicast", g, g
    raise TypeError(f"unknown scenario type: {type(scenario)!r}")


class _Evaluator:
    """Scores coefficient states by the exact inner minimum power.

    z_t[m] / z_r[m] are the per-element cascade contributions, so the
    effective channel is sum_m conj(u_m) * z_m and a single-element
    coefficient change is a rank-one update.
    """

    def __init__(self, channels: ChannelSet, scenario: Scenario):
        self.channels = channels
        self.kind, self.gamma_t, self.gamma_r = _scenario_targets(scenario)
        self.sigma2 = channels.sigma2
        self.z_t = channels.G.conj() * channels.v_t.conj()[:, None]
        self.z_r = channels.G.conj() * channels.v_r.conj()[:, None]
        self.m_elements = channels.m_elements

    def batch_power(self, a, b, d):
        if self.kind == "unicast":
            c = d.real ** 2 + d.imag ** 2
            return unicast_power_core(a, b, c, self.gamma_t, self.gamma_r, self.sigma2)[0]
        return multicast_power_core(a, b, d, self.gamma_t, self.sigma2)[0]

    def pair_power(self, h_t, h_r):
        a, b, d = pair_stats(h_t, h_r)
        return self.batch_power(a, b, d)

    def canonical_channels(self, amp: np.ndarray, th_t: np.ndarray, th_r: np.ndarray):
        """Full-composition effective channels, the one recording-grade path."""
        h_t = effective_channel(self.channels.G, self.channels.v_t, amp, th_t)
        h_r = effective_channel(self.channels.G, self.channels.v_r, 1.0 - amp, th_r)
        return h_t, h_r

    def canonical_states(self, amp, th_t, th_r):
        """(h_t, h_r, power) for a stack of run states, via the canonical path."""
        runs = amp.shape[0]
        n = self.channels.n_antennas
        h_t = np.empty((runs, n), dtype=complex)
        h_r = np.empty((runs, n), dtype=complex)
        for r in range(runs):
            h_t[r], h_r[r] = self.canonical_channels(amp[r], th_t[r], th_r[r])
        return h_t, h_r, self.pair_power(h_t, h_r)

    def solve_beamformers(self, h_t, h_r):
        if self.kind == "unicast":
            return unicast_min_power(h_t, h_r, self.gamma_t, self.gamma_r, self.sigma2)
        return multicast_min_power(h_t, h_r, self.gamma_t, self.sigma2)


def _improvement_db(before: np.ndarray, after: np.ndarray) -> np.ndarray:
    """10*log10(before/after) with inf/0 conventions: equal -> 0 improvement."""
    before = np.asarray(before, dtype=float)
    after = np.asarray(after, dtype=float)
    out = np.zeros(np.broadcast_shapes(before.shape, after.shape))
    both_fin = np.isfinite(before) & np.isfinite(after) & (after > 0.0) & (before > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(both_fin, 10.0 * np.log10(before / after), out)
    out = np.where(np.isinf(before) & np.isfinite(after), np.inf, out)
    out = np.where(np.isfinite(before) & (after == 0.0) & (before > 0.0), np.inf, out)
    return out


def _random_state(protocol: Protocol, grids: GridSpec, m: int,
                  rng: np.random.Generator, restart: int):
    """One on-grid random starting point inside the protocol's feasible set.

    Draw order per start: transmission phases, reflection phases, then the
    amplitude coordinate (mode bits / energy splits) when the protocol has
    one.  For mode switching with 2^m patterns not exceeding the restart
    budget, restart index r starts from pattern r (element m_i = bit i), so
    the whole on/off space is covered instead of sampled.
    """
    phase = grids.phase_grid()
    amps = grids.amplitude_grid()
    th_t = phase[rng.integers(0, phase.size, m)]
    th_r = phase[rng.integers(0, phase.size, m)]
    if protocol is Protocol.ENERGY_SPLITTING:
        amp = amps[rng.integers(0, amps.size, m)]
    elif protocol is Protocol.MODE_SWITCHING:
        if m < 60 and 2 ** m <= grids.restarts:
            amp = ((restart >> np.arange(m)) & 1).astype(float)
        else:
            amp = rng.integers(0, 2, m).astype(float)
    elif protocol is Protocol.OMNI_COUPLED:
        amp = np.full(m, 0.5)
        th_r = th_t.copy()
    elif protocol is Protocol.CONVENTIONAL_SPLIT:
        amp = np.concatenate([np.zeros(m // 2), np.ones(m - m // 2)])
    else:
        raise ValueError(f"no random state for protocol {protocol}")
    return amp, th_t, th_r


def _element_moves(protocol: Protocol, grids: GridSpec, m_index: int, half: int):
    """Coordinate scans for one element, in the protocol's fixed order."""
    if protocol is Protocol.ENERGY_SPLITTING:
        return ("theta_t", "theta_r", "beta")
    if protocol is Protocol.MODE_SWITCHING:
        return ("ms_joint",)
    if protocol is Protocol.OMNI_COUPLED:
        return ("omni_phase",)
    if protocol is Protocol.CONVENTIONAL_SPLIT:
        return ("theta_r",) if m_index < half else ("theta_t",)
    raise ValueError(f"no coordinate moves for protocol {protocol}")


class _MoveScan:
    """Candidate values and per-side coefficient factors for one scan."""

    def __init__(self, kind: str, grids: GridSpec):
        self.kind = kind
        phase = grids.phase_grid()
        if kind in ("theta_t", "theta_r", "omni_phase"):
            self.values = phase
            self.exp_phase = np.exp(1j * phase)
        elif kind == "beta":
            self.values = grids.amplitude_grid()
            self.sqrt_amp = np.sqrt(self.values)
            self.sqrt_amp_c = np.sqrt(1.0 - self.values)
        elif kind == "ms_joint":
            self.values = phase
            eph = np.exp(1j * phase)
            zero = np.zeros_like(eph)
            self.u_t = np.concatenate([eph, zero])   # T-mode block then R-mode block
            self.u_r = np.concatenate([zero, eph])
            self.n_phase = phase.size
        else:
            raise ValueError(kind)

    def candidate_us(self, amp_m, th_t_m, th_r_m):
        """(u_t, u_r) candidate factors, each (runs, C) or None if unchanged."""
        if self.kind == "theta_t":
            return np.sqrt(amp_m)[:, None] * self.exp_phase[None, :], None
        if self.kind == "theta_r":
            return None, np.sqrt(1.0 - amp_m)[:, None] * self.exp_phase[None, :]
        if self.kind == "beta":
            u_t = self.sqrt_amp[None, :] * np.exp(1j * th_t_m)[:, None]
            u_r = self.sqrt_amp_c[None, :] * np.exp(1j * th_r_m)[:, None]
            return u_t, u_r
        if self.kind == "ms_joint":
            runs = amp_m.size
            return (
                np.broadcast_to(self.u_t, (runs, self.u_t.size)),
                np.broadcast_to(self.u_r, (runs, self.u_r.size)),
            )
        if self.kind == "omni_phase":
            u = np.sqrt(0.5) * self.exp_phase
            runs = amp_m.size
            u = np.broadcast_to(u, (runs, u.size))
            return u, u
        raise ValueError(self.kind)

    def apply(self, amp, th_t, th_r, run: int, m: int, c: int):
        if self.kind == "theta_t":
            th_t[run, m] = self.values[c]
        elif self.kind == "theta_r":
            th_r[run, m] = self.values[c]
        elif self.kind == "beta":
            amp[run, m] = self.values[c]
        elif self.kind == "ms_joint":
            if c < self.n_phase:
                amp[run, m] = 1.0
                th_t[run, m] = self.values[c]
            else:
                amp[run, m] = 0.0
                th_r[run, m] = self.values[c - self.n_phase]
        elif self.kind == "omni_phase":
            th_t[run, m] = self.values[c]
            th_r[run, m] = self.values[c]

    def snapshot(self, amp, th_t, th_r, run: int, m: int):
        return amp[run, m], th_t[run, m], th_r[run, m]

    @staticmethod
    def restore(amp, th_t, th_r, run: int, m: int, saved):
        amp[run, m], th_t[run, m], th_r[run, m] = saved


def _descend(
    ev: _Evaluator,
    protocol: Protocol,
    grids: GridSpec,
    starts: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
):
    """Lockstep coordinate descent over a set of starting states.

    Returns per-run (amp, th_t, th_r, power, trace, converged) with every
    recorded power produced by the canonical evaluation path.
    """
    runs = len(starts)
    m_el = ev.m_elements
    half = m_el // 2
    amp = np.stack([s[0] for s in starts]).astype(float)
    th_t = np.stack([s[1] for s in starts]).astype(float)
    th_r = np.stack([s[2] for s in starts]).astype(float)
    h_t, h_r, power = ev.canonical_states(amp, th_t, th_r)
    traces = [[float(p)] for p in power]
    active = np.ones(runs, dtype=bool)
    converged = np.zeros(runs, dtype=bool)

    scans = {k: _MoveScan(k, grids) for k in ("theta_t", "theta_r", "beta", "ms_joint", "omni_phase")}
    run_ids = np.arange(runs)

    for _ in range(grids.max_sweeps):
        sweep_start = power.copy()
        for m in range(m_el):
            z_t_m = ev.z_t[m]
            z_r_m = ev.z_r[m]
            for kind in _element_moves(protocol, grids, m, half):
                scan = scans[kind]
                u_t_cur = np.sqrt(amp[:, m]) * np.exp(1j * th_t[:, m])
                u_r_cur = np.sqrt(1.0 - amp[:, m]) * np.exp(1j * th_r[:, m])
                u_t_c, u_r_c = scan.candidate_us(amp[:, m], th_t[:, m], th_r[:, m])
                if u_t_c is None:
                    a = np.sum(h_t.real ** 2 + h_t.imag ** 2, axis=-1)[:, None]
                    ht_c = None
                else:
                    ht_c = h_t[:, None, :] + (u_t_c.conj() - u_t_cur.conj()[:, None])[:, :, None] * z_t_m
                    a = np.sum(ht_c.real ** 2 + ht_c.imag ** 2, axis=-1)
                if u_r_c is None:
                    b = np.sum(h_r.real ** 2 + h_r.imag ** 2, axis=-1)[:, None]
                    hr_c = None
                else:
                    hr_c = h_r[:, None, :] + (u_r_c.conj() - u_r_cur.conj()[:, None])[:, :, None] * z_r_m
                    b = np.sum(hr_c.real ** 2 + hr_c.imag ** 2, axis=-1)
                left = h_t[:, None, :] if ht_c is None else ht_c
                right = h_r[:, None, :] if hr_c is None else hr_c
                d = np.sum(left.conj() * right, axis=-1)
                cand_power = ev.batch_power(a, b, d)

                best = np.argmin(cand_power, axis=1)  # first index wins ties
                best_p = cand_power[run_ids, best]
                propose = active & (best_p < power)
                if not np.any(propose):
                    continue
                idx = np.nonzero(propose)[0]
                saved = [scan.snapshot(amp, th_t, th_r, r, m) for r in idx]
                for r in idx:
                    scan.apply(amp, th_t, th_r, r, m, int(best[r]))
                # canonical re-check: only strict improvement under the
                # recording-grade evaluation is accepted
                new_ht, new_hr, new_p = ev.canonical_states(amp[idx], th_t[idx], th_r[idx])
                for k, r in enumerate(idx):
                    if new_p[k] < power[r]:
                        h_t[r], h_r[r], power[r] = new_ht[k], new_hr[k], new_p[k]
                    else:
                        scan.restore(amp, th_t, th_r, r, m, saved[k])
        gain_db = _improvement_db(sweep_start, power)
        for r in range(runs):
            if active[r]:
                traces[r].append(float(power[r]))
        newly_done = active & (gain_db < grids.improve_tol_db)
        converged |= newly_done
        active &= ~newly_done
        if not np.any(active):
            break
    return amp, th_t, th_r, power, traces, converged


def optimize_coefficients(
    channels: ChannelSet,
    protocol: Protocol,
    scenario: Scenario,
    grids: GridSpec = GridSpec(),
    seed: int = 0,
    warm_starts: tuple[StarCoefficients, ...] = (),
) -> SolveResult:
    """Optimize the per-element coefficients for one static protocol.

    warm_starts seeds extra descent runs (in addition to grids.restarts
    random ones).  Passing a poorer protocol's solution guarantees the
    result is no worse than it.  Time switching has its own optimizer.

    Raises Infeasible when no run reaches a feasible point.
    """
    if protocol is Protocol.TIME_SWITCHING:
        raise ValueError("use optimize_ts for the time-switching protocol")
    m = channels.m_elements
    if protocol is Protocol.CONVENTIONAL_SPLIT and m % 2 != 0:
        raise ValueError("the fixed split baseline needs an even element count")
    ev = _Evaluator(channels, scenario)

    starts = []
    for ws in warm_starts:
        if ws.m_elements != m:
            raise ValueError("warm start element count does not match the channels")
        starts.append((ws.beta_t.copy(), ws.theta_t.copy(), ws.theta_r.copy()))
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    for restart in range(grids.restarts):
        starts.append(_random_state(protocol, grids, m, rng, restart))
    if not starts:
        raise ValueError("no starting points: need restarts >= 1 or warm starts")

    amp, th_t, th_r, power, traces, converged = _descend(ev, protocol, grids, starts)
    best = int(np.argmin(power))  # warm-start runs come first and win ties
    if not np.isfinite(power[best]):
        exc = Infeasible("no restart reached a feasible coefficient set")
        exc.trace = traces[best]
        raise exc
    coeffs = StarCoefficients(amp[best], th_t[best], th_r[best])
    h_t, h_r = ev.canonical_channels(coeffs.beta_t, coeffs.theta_t, coeffs.theta_r)
    beamformers = ev.solve_beamformers(h_t, h_r)
    return SolveResult(
        coefficients=coeffs,
        beamformers=beamformers,
        power_w=float(power[best]),
        objective_trace=traces[best],
        converged=bool(converged[best]),
    )


def _gain_descend(z: np.ndarray, grids: GridSpec, starts: np.ndarray):
    """Phase-only coordinate ascent of the cascade gain ||sum conj(u_m) z_m||^2.

    starts is (runs, M); returns (phases, gains, best_history, converged)
    where best_history[k] is the best gain over all runs after k sweeps and
    gains come from the canonical full composition.
    """
    runs, m_el = starts.shape
    phases = starts.astype(float).copy()
    exp_grid = np.exp(1j * grids.phase_grid())
    values = grids.phase_grid()

    def canonical_gain(phase_rows):
        h = np.exp(-1j * phase_rows) @ z  # (runs, N) full composition
        return np.sum(h.real ** 2 + h.imag ** 2, axis=-1), h

    gains, h = canonical_gain(phases)
    active = np.ones(runs, dtype=bool)
    converged = np.zeros(runs, dtype=bool)
    best_history = [float(np.max(gains))]
    run_ids = np.arange(runs)
    for _ in range(grids.max_sweeps):
        sweep_start = gains.copy()
        for m in range(m_el):
            u_cur = np.exp(1j * phases[:, m])
            h_c = h[:, None, :] + (exp_grid.conj()[None, :] - u_cur.conj()[:, None])[:, :, None] * z[m]
            g_c = np.sum(h_c.real ** 2 + h_c.imag ** 2, axis=-1)
            best = np.argmax(g_c, axis=1)
            best_g = g_c[run_ids, best]
            propose = active & (best_g > gains)
            if not np.any(propose):
                continue
            idx = np.nonzero(propose)[0]
            old = phases[idx, m].copy()
            phases[idx, m] = values[best[idx]]
            new_g, new_h = canonical_gain(phases[idx])
            for k, r in enumerate(idx):
                if new_g[k] > gains[r]:
                    gains[r] = new_g[k]
                    h[r] = new_h[k]
                else:
                    phases[r, m] = old[k]
        best_history.append(float(np.max(gains)))
        gain_db = _improvement_db(gains, sweep_start)  # ascent: after/before swapped
        newly_done = active & (gain_db < grids.improve_tol_db)
        converged |= newly_done
        active &= ~newly_done
        if not np.any(active):
            break
    return phases, gains, best_history, converged


def ts_time_allocation(g_t: float, g_r: float, scenario: Scenario, sigma2: float,
                       eps: float = 1e-4, tol: float = 1e-6) -> TsAllocation:
    """Optimize the transmit-period time fraction for given cascade gains.

    The side serving rate R during a fraction lam of the time needs power
    (2^(R/lam) - 1) * sigma2 / gain; the average lam*P_t + (1-lam)*P_r is
    convex in lam and minimized by golden-section search on (eps, 1-eps).
    """
    kind, _, _ = _scenario_targets(scenario)
    if kind == "unicast":
        rate_t, rate_r = scenario.rate_t, scenario.rate_r
    else:
        rate_t = rate_r = scenario.rate
    if (rate_t > 0.0 and g_t <= 0.0) or (rate_r > 0.0 and g_r <= 0.0):
        raise Infeasible("zero cascade gain with a positive rate target")

    def p_side(rate, gain, lam_side):
        if rate == 0.0:
            return np.zeros_like(np.asarray(lam_side, dtype=float))
        with np.errstate(over="ignore"):  # boundary splits overflow to inf
            return (2.0 ** (rate / lam_side) - 1.0) * sigma2 / gain

    def avg_power(lam):
        lam = np.asarray(lam, dtype=float)
        return lam * p_side(rate_t, g_t, lam) + (1.0 - lam) * p_side(rate_r, g_r, 1.0 - lam)

    lam = golden_section_min(avg_power, eps, 1.0 - eps, tol)
    p_t = float(p_side(rate_t, g_t, np.asarray(lam)))
    p_r = float(p_side(rate_r, g_r, np.asarray(1.0 - lam)))
    return TsAllocation(lam=float(lam), p_t=p_t, p_r=p_r,
                        p_avg=float(lam * p_t + (1.0 - lam) * p_r))


def optimize_ts(
    channels: ChannelSet,
    scenario: Scenario,
    grids: GridSpec = GridSpec(),
    seed: int = 0,
) -> SolveResult:
    """Optimize the time-switching protocol.

    Each period serves a single user with the whole surface in one mode,
    so the phase design reduces to maximizing the cascade gain (matched
    filtering is then the optimal precoder); the periods are independent
    and the time split is optimized afterwards.
    """
    m = channels.m_elements
    ev = _Evaluator(channels, scenario)
    kind, _, _ = _scenario_targets(scenario)
    if kind == "unicast":
        rate_t, rate_r = scenario.rate_t, scenario.rate_r
    else:
        rate_t = rate_r = scenario.rate

    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    phase = grids.phase_grid()
    starts_t = np.vstack(
        [np.zeros((1, m))] + [phase[rng.integers(0, phase.size, m)][None, :] for _ in range(grids.restarts)]
    )
    starts_r = np.vstack(
        [np.zeros((1, m))] + [phase[rng.integers(0, phase.size, m)][None, :] for _ in range(grids.restarts)]
    )

    ph_t, gains_t, hist_t, conv_t = _gain_descend(ev.z_t, grids, starts_t)
    ph_r, gains_r, hist_r, conv_r = _gain_descend(ev.z_r, grids, starts_r)
    best_t = int(np.argmax(gains_t))
    best_r = int(np.argmax(gains_r))
    g_t = float(gains_t[best_t])
    g_r = float(gains_r[best_r])
    if (rate_t > 0.0 and g_t == 0.0) or (rate_r > 0.0 and g_r == 0.0):
        raise Infeasible("a served side has zero cascade gain")

    alloc = ts_time_allocation(g_t, g_r, scenario, channels.sigma2)
    # per-sweep trace: re-allocate time for the best gains seen after each
    # sweep; gains only grow, so the average power only falls
    depth = max(len(hist_t), len(hist_r))
    hist_t = hist_t + [hist_t[-1]] * (depth - len(hist_t))
    hist_r = hist_r + [hist_r[-1]] * (depth - len(hist_r))
    trace = []
    for gt_k, gr_k in zip(hist_t[:-1], hist_r[:-1]):
        if (rate_t > 0.0 and gt_k == 0.0) or (rate_r > 0.0 and gr_k == 0.0):
            entry = np.inf
        else:
            entry = ts_time_allocation(gt_k, gr_k, scenario, channels.sigma2).p_avg
        # running min: the golden-section allocation is only 1e-6-accurate
        # in lam, so clamp out sub-tolerance upticks between sweeps
        trace.append(min(entry, trace[-1]) if trace else entry)
    trace.append(min(alloc.p_avg, trace[-1]) if trace else alloc.p_avg)
    coeff_t = StarCoefficients.full_transmission(m, ph_t[best_t])
    coeff_r = StarCoefficients.full_reflection(m, ph_r[best_r])
    h_t = effective_channel(channels.G, channels.v_t, coeff_t.beta_t, coeff_t.theta_t)
    h_r = effective_channel(channels.G, channels.v_r, coeff_r.beta_r, coeff_r.theta_r)
    gamma_t_period = rate_to_sinr(rate_t / alloc.lam) if rate_t > 0.0 else 0.0
    gamma_r_period = rate_to_sinr(rate_r / (1.0 - alloc.lam)) if rate_r > 0.0 else 0.0
    w_t, _ = single_user_min_power(h_t, gamma_t_period, channels.sigma2)
    w_r, _ = single_user_min_power(h_r, gamma_r_period, channels.sigma2)
    return SolveResult(
        coefficients=(coeff_t, coeff_r),
        beamformers=(w_t, w_r),
        power_w=trace[-1],
        objective_trace=trace,
        converged=bool(conv_t[best_t] and conv_r[best_r]),
        lam=alloc.lam,
    )


def oracle_enumeration_size(protocol: Protocol, m_elements: int, grids: GridSpec) -> int:
    """Number of inner solves the exhaustive oracle would perform."""
    p, a = grids.n_phase, grids.n_amplitude
    if protocol is Protocol.ENERGY_SPLITTING:
        return (a * p * p) ** m_elements
    if protocol is Protocol.MODE_SWITCHING:
        return (2 * p) ** m_elements
    if protocol in (Protocol.OMNI_COUPLED, Protocol.CONVENTIONAL_SPLIT):
        return p ** m_elements
    if protocol is Protocol.TIME_SWITCHING:
        return 2 * p ** m_elements
    raise ValueError(f"unknown protocol: {protocol!r}")


def _combo_indices(set_size: int, m: int) -> np.ndarray:
    """All length-m index tuples, lexicographic (element 0 most significant)."""
    grids = np.meshgrid(*([np.arange(set_size)] * m), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, m)


def exhaustive_oracle(
    channels: ChannelSet,
    protocol: Protocol,
    scenario: Scenario,
    grids: GridSpec,
) -> SolveResult:
    """Global optimum over the protocol's full coefficient grid.

    Scores every grid point with the same inner solvers as the descent and
    returns the minimum (ties: lowest enumeration index).  Intended for
    small m and coarse grids; raises RefusedSize beyond the solve budget.
    """
    m = channels.m_elements
    size = oracle_enumeration_size(protocol, m, grids)
    if size > ORACLE_SOLVE_LIMIT:
        raise RefusedSize(f"{size} inner solves exceed the {ORACLE_SOLVE_LIMIT} budget")
    if protocol is Protocol.CONVENTIONAL_SPLIT and m % 2 != 0:
        raise ValueError("the fixed split baseline needs an even element count")
    ev = _Evaluator(channels, scenario)
    phase = grids.phase_grid()
    amps = grids.amplitude_grid()

    if protocol is Protocol.TIME_SWITCHING:
        return _exhaustive_ts(channels, scenario, grids, ev, phase)

    # per-element candidate tables (amp, theta_t, theta_r)
    if protocol is Protocol.ENERGY_SPLITTING:
        ai, ti, ri = np.meshgrid(np.arange(amps.size), np.arange(phase.size),
                                 np.arange(phase.size), indexing="ij")
        amp_set = amps[ai.ravel()]
        th_t_set = phase[ti.ravel()]
        th_r_set = phase[ri.ravel()]
    elif protocol is Protocol.MODE_SWITCHING:
        amp_set = np.concatenate([np.ones(phase.size), np.zeros(phase.size)])
        th_t_set = np.concatenate([phase, np.zeros(phase.size)])
        th_r_set = np.concatenate([np.zeros(phase.size), phase])
    elif protocol is Protocol.OMNI_COUPLED:
        amp_set = np.full(phase.size, 0.5)
        th_t_set = phase
        th_r_set = phase
    else:  # CONVENTIONAL_SPLIT: per-element set depends on the element's half
        amp_set = None

    combos = _combo_indices(phase.size if protocol is Protocol.CONVENTIONAL_SPLIT
                            else amp_set.size, m)
    if protocol is Protocol.CONVENTIONAL_SPLIT:
        half = m // 2
        amp_rows = np.broadcast_to(
            np.concatenate([np.zeros(half), np.ones(m - half)]), combos.shape
        )
        th_t_rows = np.where(np.arange(m) >= half, phase[combos], 0.0)
        th_r_rows = np.where(np.arange(m) < half, phase[combos], 0.0)
    else:
        amp_rows = amp_set[combos]
        th_t_rows = th_t_set[combos]
        th_r_rows = th_r_set[combos]

    u_t = np.sqrt(amp_rows) * np.exp(1j * th_t_rows)
    u_r = np.sqrt(1.0 - amp_rows) * np.exp(1j * th_r_rows)
    h_t = u_t.conj() @ ev.z_t
    h_r = u_r.conj() @ ev.z_r
    powers = ev.pair_power(h_t, h_r)
    best = int(np.argmin(powers))
    if not np.isfinite(powers[best]):
        raise Infeasible("every grid point is infeasible")
    coeffs = StarCoefficients(amp_rows[best], th_t_rows[best], th_r_rows[best])
    # record through the canonical path so descent results compare exactly
    ht_c, hr_c = ev.canonical_channels(coeffs.beta_t, coeffs.theta_t, coeffs.theta_r)
    power = float(ev.pair_power(ht_c[None, :], hr_c[None, :])[0])
    return SolveResult(
        coefficients=coeffs,
        beamformers=ev.solve_beamformers(ht_c, hr_c),
        power_w=power,
        objective_trace=[power],
        converged=True,
    )


def _exhaustive_ts(channels, scenario, grids, ev, phase):
    m = channels.m_elements
    combos = _combo_indices(phase.size, m)
    rows = phase[combos]
    gains_t = np.sum(np.abs(np.exp(-1j * rows) @ ev.z_t) ** 2, axis=-1)
    gains_r = np.sum(np.abs(np.exp(-1j * rows) @ ev.z_r) ** 2, axis=-1)
    bt, br = int(np.argmax(gains_t)), int(np.argmax(gains_r))
    coeff_t = StarCoefficients.full_transmission(m, rows[bt])
    coeff_r = StarCoefficients.full_reflection(m, rows[br])
    h_t = effective_channel(channels.G, channels.v_t, coeff_t.beta_t, coeff_t.theta_t)
    h_r = effective_channel(channels.G, channels.v_r, coeff_r.beta_r, coeff_r.theta_r)
    g_t = float(np.sum(np.abs(h_t) ** 2))
    g_r = float(np.sum(np.abs(h_r) ** 2))
    kind, _, _ = _scenario_targets(scenario)
    if kind == "unicast":
        rate_t, rate_r = scenario.rate_t, scenario.rate_r
    else:
        rate_t = rate_r = scenario.rate
    alloc = ts_time_allocation(g_t, g_r, scenario, channels.sigma2)
    gamma_t_period = rate_to_sinr(rate_t / alloc.lam) if rate_t > 0.0 else 0.0
    gamma_r_period = rate_to_sinr(rate_r / (1.0 - alloc.lam)) if rate_r > 0.0 else 0.0
    w_t, _ = single_user_min_power(h_t, gamma_t_period, channels.sigma2)
    w_r, _ = single_user_min_power(h_r, gamma_r_period, channels.sigma2)
    return SolveResult(
        coefficients=(coeff_t, coeff_r),
        beamformers=(w_t, w_r),
        power_w=alloc.p_avg,
        objective_trace=[alloc.p_avg],
        converged=True,
        lam=alloc.lam,
    )
