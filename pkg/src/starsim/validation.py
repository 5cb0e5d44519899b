"""Built-in validation suite: construction invariants, oracle agreement,
solver tightness, determinism, and the protocol nesting guarantees.

`validate()` backs the CLI's validate subcommand and returns a report the
caller can render as a table; every check is also exercised by the test
suite with pinned tolerances.
"""
from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .beamforming import multicast_min_power, unicast_min_power
from .channel import FadingParams, Geometry, generate_channel_set
from .harness import SweepConfig, run_sweep, write_aggregate_csv, write_trials_csv
from .model import (
    Multicast,
    Protocol,
    Unicast,
    multicast_snrs,
    unicast_sinrs,
)
from .protocols import GridSpec, exhaustive_oracle, optimize_coefficients, optimize_ts

DB_ORACLE_TOL = 0.1          # descent vs exhaustive oracle
ORACLE_PASS_FRACTION = 0.95
CONSERVATION_TOL = 1e-12
TIGHTNESS_REL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def table(self) -> str:
        width = max(len(c.name) for c in self.checks)
        lines = [f"{'check'.ljust(width)}  result  detail"]
        for c in self.checks:
            lines.append(
                f"{c.name.ljust(width)}  {'PASS' if c.passed else 'FAIL':6}  {c.detail}"
            )
        return "\n".join(lines)


def conservation_residual(coefficient_sets, beta_r_override=None) -> float:
    """Worst per-element violation of |T|^2 + |R|^2 = 1 over coefficient sets.

    beta_r_override replaces the derived reflected fractions (a fault-
    injection hook for negative-control tests).
    """
    worst = 0.0
    for i, coeffs in enumerate(coefficient_sets):
        t2 = np.abs(coeffs.transmission_coeffs()) ** 2
        if beta_r_override is not None:
            r2 = np.abs(np.sqrt(beta_r_override[i]) * np.exp(1j * coeffs.theta_r)) ** 2
        else:
            r2 = np.abs(coeffs.reflection_coeffs()) ** 2
        worst = max(worst, float(np.max(np.abs(t2 + r2 - 1.0))))
    return worst


def _flatten_coefficient_sets(solutions) -> list:
    sets = []
    for sol in solutions.values():
        if isinstance(sol.coefficients, tuple):
            sets.extend(sol.coefficients)
        else:
            sets.append(sol.coefficients)
    return sets


def _tiny_config() -> SweepConfig:
    return SweepConfig(
        element_counts=(4, 6),
        trials=2,
        grids=GridSpec(n_phase=16, n_amplitude=5, restarts=2),
        master_seed=424242,
    )


def check_conservation() -> CheckResult:
    _, _, solutions = run_sweep(_tiny_config(), max_workers=1, keep_solutions=True)
    worst = conservation_residual(_flatten_coefficient_sets(solutions))
    return CheckResult(
        "energy-conservation", worst < CONSERVATION_TOL,
        f"max |T^2+R^2-1| = {worst:.3e} (< {CONSERVATION_TOL:g})",
    )


def check_plugback(n_instances: int = 100, seed: int = 1234) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_uni = 0.0
    worst_mc = 0.0
    sigma2 = 1.0
    for _ in range(n_instances):
        h_t = (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / np.sqrt(2)
        h_r = (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / np.sqrt(2)
        g_t, g_r = np.exp(rng.uniform(-1, 2, size=2))
        sol = unicast_min_power(h_t, h_r, g_t, g_r, sigma2)
        s_t, s_r = unicast_sinrs(h_t, h_r, sol.w_t, sol.w_r, sigma2)
        worst_uni = max(worst_uni, abs(s_t - g_t) / g_t, abs(s_r - g_r) / g_r)
        g = float(np.exp(rng.uniform(-1, 2)))
        mc = multicast_min_power(h_t, h_r, g, sigma2)
        snr_t, snr_r = multicast_snrs(h_t, h_r, mc.w, sigma2)
        if min(snr_t, snr_r) < g * (1.0 - 1e-9):
            worst_mc = np.inf
        worst_mc = max(worst_mc, min(abs(snr_t - g), abs(snr_r - g)) / g)
    ok = worst_uni < TIGHTNESS_REL and worst_mc < TIGHTNESS_REL
    return CheckResult(
        "plug-back-tightness", ok,
        f"unicast max rel err {worst_uni:.2e}, multicast {worst_mc:.2e}",
    )


def oracle_agreement(n_channels: int = 100, seed: int = 777) -> dict[Protocol, int]:
    """Count of seeded M=2 channels where descent is within 0.1 dB of the
    exhaustive oracle, per protocol (coarse 8-phase/5-amplitude grids).

    The descent runs exactly as deployed: four random restarts plus the
    warm-start chain (fixed split -> mode switching -> energy splitting,
    omni -> energy splitting).
    """
    grids = GridSpec(n_phase=8, n_amplitude=5, restarts=4)
    geometry = Geometry()
    fading = FadingParams()
    scenario = Unicast(1.0, 1.0)
    hits = {p: 0 for p in Protocol}
    for i in range(n_channels):
        channels = generate_channel_set(geometry, fading, 2, 2, seed=seed + i)
        conv = optimize_coefficients(channels, Protocol.CONVENTIONAL_SPLIT, scenario,
                                     grids, seed=seed + i)
        ms = optimize_coefficients(channels, Protocol.MODE_SWITCHING, scenario,
                                   grids, seed=seed + i, warm_starts=(conv.coefficients,))
        omni = optimize_coefficients(channels, Protocol.OMNI_COUPLED, scenario,
                                     grids, seed=seed + i)
        es = optimize_coefficients(channels, Protocol.ENERGY_SPLITTING, scenario,
                                   grids, seed=seed + i,
                                   warm_starts=(ms.coefficients, omni.coefficients))
        ts = optimize_ts(channels, scenario, grids, seed=seed + i)
        got = {
            Protocol.CONVENTIONAL_SPLIT: conv.power_w,
            Protocol.MODE_SWITCHING: ms.power_w,
            Protocol.OMNI_COUPLED: omni.power_w,
            Protocol.ENERGY_SPLITTING: es.power_w,
            Protocol.TIME_SWITCHING: ts.power_w,
        }
        for protocol in Protocol:
            ref = exhaustive_oracle(channels, protocol, scenario, grids).power_w
            gap_db = 10.0 * np.log10(got[protocol] / ref) if ref > 0 else 0.0
            if gap_db <= DB_ORACLE_TOL:
                hits[protocol] += 1
    return hits


def check_oracle(n_channels: int = 100) -> CheckResult:
    hits = oracle_agreement(n_channels)
    need = int(np.ceil(ORACLE_PASS_FRACTION * n_channels))
    detail = ", ".join(f"{p.value}={hits[p]}/{n_channels}" for p in hits)
    return CheckResult(
        "oracle-equivalence", all(h >= need for h in hits.values()), detail,
    )


def _sweep_bytes(config: SweepConfig, workers: int) -> tuple[bytes, bytes]:
    records, aggregates = run_sweep(config, max_workers=workers)
    with tempfile.TemporaryDirectory() as td:
        tpath = Path(td) / "trials.csv"
        apath = Path(td) / "aggregate.csv"
        write_trials_csv(records, tpath)
        write_aggregate_csv(aggregates, apath)
        return tpath.read_bytes(), apath.read_bytes()


def check_determinism() -> CheckResult:
    config = _tiny_config()
    t1, a1 = _sweep_bytes(config, workers=1)
    t2, a2 = _sweep_bytes(config, workers=2)
    ok = t1 == t2 and a1 == a2
    return CheckResult(
        "determinism", ok,
        "1-worker and 2-worker outputs byte-identical" if ok else "outputs differ",
    )


def check_nesting() -> CheckResult:
    records, _, solutions = run_sweep(_tiny_config(), max_workers=1, keep_solutions=True)
    violations = 0
    trials = {(r.scenario, r.m_elements, r.trial) for r in records}
    for scenario, m, trial in trials:
        def power_of(proto):
            sol = solutions.get((proto.value, scenario, m, trial))
            return sol.power_w if sol is not None else None
        p_es = power_of(Protocol.ENERGY_SPLITTING)
        p_ms = power_of(Protocol.MODE_SWITCHING)
        p_conv = power_of(Protocol.CONVENTIONAL_SPLIT)
        p_omni = power_of(Protocol.OMNI_COUPLED)
        if p_es is not None and p_ms is not None and not p_es <= p_ms:
            violations += 1
        if p_ms is not None and p_conv is not None and not p_ms <= p_conv:
            violations += 1
        if p_es is not None and p_omni is not None and not p_es <= p_omni:
            violations += 1
    return CheckResult(
        "protocol-nesting", violations == 0,
        f"{violations} violations of P_es <= P_ms <= P_conventional, P_es <= P_omni",
    )


def check_monotone_traces() -> CheckResult:
    _, _, solutions = run_sweep(_tiny_config(), max_workers=1, keep_solutions=True)
    bad = 0
    for sol in solutions.values():
        trace = sol.objective_trace
        if any(t2 > t1 for t1, t2 in zip(trace, trace[1:])):
            bad += 1
    return CheckResult(
        "monotone-descent", bad == 0, f"{bad} non-monotone objective traces",
    )


def validate(oracle_channels: int = 100) -> ValidationReport:
    """Run every validation suite and collect a pass/fail table."""
    checks = (
        check_conservation(),
        check_plugback(),
        check_oracle(oracle_channels),
        check_determinism(),
        check_nesting(),
        check_monotone_traces(),
    )
    return ValidationReport(checks)
