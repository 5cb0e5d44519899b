"""Config-driven Monte Carlo experiment runner and result persistence.

A sweep crosses protocols x element counts x trials for one or both
scenarios.  Channel seeds depend only on (master_seed, M, trial), so every
protocol optimizes against identical fading (paired comparison), while
optimizer seeds also fold in the protocol and scenario.  Trials may run in
parallel; per-trial seeding, not execution order, determines all
randomness, and aggregation sorts records before reducing, so outputs are
byte-identical for any worker count.
"""
from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .beamforming import Infeasible
from .channel import FadingParams, Geometry, generate_channel_set, watts_to_dbm
from .model import Multicast, Protocol, Scenario, Unicast
from .protocols import GridSpec, SolveResult, optimize_coefficients, optimize_ts

PROTOCOL_ORDER = (
    Protocol.ENERGY_SPLITTING,
    Protocol.MODE_SWITCHING,
    Protocol.TIME_SWITCHING,
    Protocol.CONVENTIONAL_SPLIT,
    Protocol.OMNI_COUPLED,
)
SCENARIO_NAMES = ("unicast", "multicast")


class ConfigError(ValueError):
    """A sweep configuration is malformed."""


@dataclass(frozen=True)
class SweepConfig:
    """Everything one experiment needs, JSON-serializable field for field."""

    geometry: Geometry = field(default_factory=Geometry)
    fading: FadingParams = field(default_factory=FadingParams)
    n_antennas: int = 2
    element_counts: tuple[int, ...] = (10, 20, 30, 40, 50)
    protocols: tuple[Protocol, ...] = PROTOCOL_ORDER
    scenarios: tuple[str, ...] = SCENARIO_NAMES
    unicast_rates: tuple[float, float] = (1.0, 1.0)
    multicast_rate: float = 3.46
    grids: GridSpec = field(default_factory=GridSpec)
    trials: int = 100
    master_seed: int = 7_2024_0809
    out_dir: str = "results"
    ts_power_metric: str = "average"

    def __post_init__(self):
        object.__setattr__(self, "element_counts", tuple(int(m) for m in self.element_counts))
        object.__setattr__(self, "protocols", tuple(self.protocols))
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "unicast_rates", tuple(float(r) for r in self.unicast_rates))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n_antennas < 1:
            raise ConfigError("n_antennas must be >= 1")
        if not self.element_counts or any(m < 1 for m in self.element_counts):
            raise ConfigError("element_counts must be positive")
        if Protocol.CONVENTIONAL_SPLIT in self.protocols and any(
            m % 2 for m in self.element_counts
        ):
            raise ConfigError("the fixed split baseline needs even element counts")
        for s in self.scenarios:
            if s not in SCENARIO_NAMES:
                raise ConfigError(f"unknown scenario {s!r}")
        if len(self.unicast_rates) != 2:
            raise ConfigError("unicast_rates must be [rate_t, rate_r]")
        if self.ts_power_metric not in ("average", "peak"):
            raise ConfigError("ts_power_metric must be 'average' or 'peak'")

    def scenario(self, name: str) -> Scenario:
        if name == "unicast":
            return Unicast(*self.unicast_rates)
        if name == "multicast":
            return Multicast(self.multicast_rate)
        raise ConfigError(f"unknown scenario {name!r}")


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one (protocol, scenario, M, trial) optimization."""

    protocol: str
    scenario: str
    m_elements: int
    trial: int
    seed: int           # derived optimizer seed
    channel_hash: str   # debug field: all protocols of a trial must match
    feasible: bool
    power_w: float      # nan when infeasible
    power_dbm: float    # 10*log10(power_w) + 30; nan when infeasible
    sweeps: int
    # excluded from equality and never persisted: outputs stay byte-stable
    wall_ms: float = field(compare=False, default=0.0)


@dataclass(frozen=True)
class AggregateRecord:
    """Per-(protocol, scenario, M) summary over trials."""

    protocol: str
    scenario: str
    m_elements: int
    mean_power_dbm: float   # 10*log10(mean of linear Watts) + 30
    ci95_db: float          # half-width of the 95% CI, in dB about the mean
    feasibility_rate: float


def derive_seed(label: str, *parts) -> int:
    """Stable 64-bit seed from a label and context values (documented rule:
    big-endian blake2b-8 of 'starsim:<label>:<part>:...')."""
    msg = ":".join(["starsim", label, *(str(p) for p in parts)]).encode()
    return int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "big")


def channel_seed(config: SweepConfig, m: int, trial: int) -> int:
    """Protocol-independent, so every protocol sees identical fading."""
    return derive_seed("channel", config.master_seed, m, trial)


def optimizer_seed(config: SweepConfig, protocol: Protocol, scenario: str,
                   m: int, trial: int) -> int:
    return derive_seed("opt", config.master_seed, protocol.value, scenario, m, trial)


def _chain_protocols(wanted: set[Protocol], m: int) -> list[Protocol]:
    """Solve order satisfying the warm-start chain.

    The chain (fixed split -> mode switching -> energy splitting, and
    omni -> energy splitting) is always computed for the members a wanted
    protocol warm-starts from, so each protocol's result is independent of
    which other protocols the sweep happens to include.
    """
    order: list[Protocol] = []
    need = set(wanted)
    if Protocol.ENERGY_SPLITTING in need:
        need |= {Protocol.MODE_SWITCHING, Protocol.OMNI_COUPLED}
    if Protocol.MODE_SWITCHING in need and m % 2 == 0:
        need.add(Protocol.CONVENTIONAL_SPLIT)
    for p in (Protocol.CONVENTIONAL_SPLIT, Protocol.MODE_SWITCHING,
              Protocol.OMNI_COUPLED, Protocol.ENERGY_SPLITTING, Protocol.TIME_SWITCHING):
        if p in need:
            order.append(p)
    return order


def run_trial_group(config: SweepConfig, scenario_name: str, m: int, trial: int,
                    keep_solutions: bool = False):
    """Run every configured protocol on one shared channel realization.

    Returns (records, solutions): records maps Protocol -> TrialRecord for
    the configured protocols; solutions carries the SolveResults (all
    chain members) when keep_solutions is set.
    """
    scenario = config.scenario(scenario_name)
    channels = generate_channel_set(
        config.geometry, config.fading, m, config.n_antennas,
        seed=channel_seed(config, m, trial),
    )
    chash = channels.digest()
    wanted = set(config.protocols)
    solutions: dict[Protocol, SolveResult] = {}
    records: dict[Protocol, TrialRecord] = {}

    for protocol in _chain_protocols(wanted, m):
        seed = optimizer_seed(config, protocol, scenario_name, m, trial)
        warm = []
        if protocol is Protocol.MODE_SWITCHING:
            if Protocol.CONVENTIONAL_SPLIT in solutions:
                warm.append(solutions[Protocol.CONVENTIONAL_SPLIT].coefficients)
        elif protocol is Protocol.ENERGY_SPLITTING:
            for src in (Protocol.MODE_SWITCHING, Protocol.OMNI_COUPLED):
                if src in solutions:
                    warm.append(solutions[src].coefficients)
        start = time.perf_counter()
        try:
            if protocol is Protocol.TIME_SWITCHING:
                result = optimize_ts(channels, scenario, config.grids, seed)
            else:
                result = optimize_coefficients(
                    channels, protocol, scenario, config.grids, seed,
                    warm_starts=tuple(warm),
                )
        except Infeasible:
            result = None
        wall_ms = (time.perf_counter() - start) * 1e3
        if result is not None:
            solutions[protocol] = result
        if protocol not in wanted:
            continue
        if result is None:
            records[protocol] = TrialRecord(
                protocol=protocol.value, scenario=scenario_name, m_elements=m,
                trial=trial, seed=seed, channel_hash=chash, feasible=False,
                power_w=float("nan"), power_dbm=float("nan"), sweeps=0,
                wall_ms=wall_ms,
            )
            continue
        power = result.power_w
        if protocol is Protocol.TIME_SWITCHING and config.ts_power_metric == "peak":
            w_t, w_r = result.beamformers
            power = float(max(np.sum(np.abs(w_t) ** 2), np.sum(np.abs(w_r) ** 2)))
        records[protocol] = TrialRecord(
            protocol=protocol.value, scenario=scenario_name, m_elements=m,
            trial=trial, seed=seed, channel_hash=chash, feasible=True,
            power_w=power, power_dbm=watts_to_dbm(power),
            sweeps=result.sweeps_used, wall_ms=wall_ms,
        )
    return records, (solutions if keep_solutions else None)


def run_trial(config: SweepConfig, protocol: Protocol, scenario_name: str,
              m: int, trial: int) -> TrialRecord:
    """One protocol on one trial (recomputing its warm-start chain)."""
    if protocol not in config.protocols:
        config = replace(config, protocols=tuple(set(config.protocols) | {protocol}))
    records, _ = run_trial_group(config, scenario_name, m, trial)
    return records[protocol]


def resolve_workers(explicit: int | None = None) -> int:
    """Worker count: explicit argument, then STARSIM_THREADS, then CPUs."""
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get("STARSIM_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _group_worker(args):
    config, scenario_name, m, trial, keep = args
    records, solutions = run_trial_group(config, scenario_name, m, trial, keep)
    return (scenario_name, m, trial), records, solutions


def _warm_kernels() -> None:
    """Trigger the jitted solver cores once before forking workers."""
    from .beamforming import multicast_power_core, unicast_power_core

    unicast_power_core(1.0, 1.0, 0.0, 1.0, 1.0, 1.0)
    multicast_power_core(1.0, 1.0, 0.0 + 0.0j, 1.0, 1.0)


def run_sweep(config: SweepConfig, max_workers: int | None = None,
              keep_solutions: bool = False):
    """Full cross product of scenarios x element counts x trials.

    Returns (trial_records, aggregates) sorted by (protocol, scenario, M,
    trial); with keep_solutions also returns a dict keyed by
    (protocol, scenario, M, trial) holding every SolveResult of the
    warm-start chains.
    """
    items = [
        (config, s, m, t, keep_solutions)
        for s in config.scenarios
        for m in config.element_counts
        for t in range(config.trials)
    ]
    workers = resolve_workers(max_workers)
    records: list[TrialRecord] = []
    solutions: dict[tuple, SolveResult] = {}
    if workers > 1 and len(items) > 1:
        _warm_kernels()  # fork with compiled cores in place
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(items) // (workers * 8))
            results = pool.map(_group_worker, items, chunksize=chunk)
            for (scenario_name, m, trial), recs, sols in results:
                records.extend(recs.values())
                if keep_solutions:
                    for proto, sol in sols.items():
                        solutions[(proto.value, scenario_name, m, trial)] = sol
    else:
        for item in items:
            (scenario_name, m, trial), recs, sols = _group_worker(item)
            records.extend(recs.values())
            if keep_solutions:
                for proto, sol in sols.items():
                    solutions[(proto.value, scenario_name, m, trial)] = sol
    records = sort_trials(records)
    aggregates = aggregate_trials(records)
    if keep_solutions:
        return records, aggregates, solutions
    return records, aggregates


def _protocol_rank(value: str) -> int:
    for i, p in enumerate(PROTOCOL_ORDER):
        if p.value == value:
            return i
    return len(PROTOCOL_ORDER)


def sort_trials(records: list[TrialRecord]) -> list[TrialRecord]:
    return sorted(
        records,
        key=lambda r: (_protocol_rank(r.protocol), r.scenario, r.m_elements, r.trial),
    )


def aggregate_trials(records: list[TrialRecord]) -> list[AggregateRecord]:
    """Reduce trial records: average linear Watts, then convert to dBm."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in sort_trials(records):
        groups.setdefault((r.protocol, r.scenario, r.m_elements), []).append(r)
    out = []
    for (protocol, scenario, m), rows in groups.items():
        rows = sorted(rows, key=lambda r: r.trial)
        powers = np.array([r.power_w for r in rows if r.feasible])
        rate = len(powers) / len(rows)
        if powers.size == 0:
            out.append(AggregateRecord(protocol, scenario, m,
                                       float("nan"), float("nan"), 0.0))
            continue
        mean = float(np.mean(powers))
        if powers.size > 1:
            half = 1.96 * float(np.std(powers, ddof=1)) / np.sqrt(powers.size)
            ci_db = float(10.0 * np.log10((mean + half) / mean))
        else:
            ci_db = 0.0
        out.append(AggregateRecord(protocol, scenario, m,
                                   watts_to_dbm(mean), ci_db, rate))
    return out


def _fmt(x: float) -> str:
    return f"{x:.9g}"


TRIALS_HEADER = "protocol,scenario,m_elements,trial,seed,channel_hash,feasible,power_w,power_dbm,sweeps"
AGGREGATE_HEADER = "protocol,scenario,m_elements,mean_power_dbm,ci95_db,feasibility_rate"


def write_trials_csv(records: list[TrialRecord], path) -> None:
    lines = [TRIALS_HEADER]
    for r in sort_trials(records):
        lines.append(",".join([
            r.protocol, r.scenario, str(r.m_elements), str(r.trial), str(r.seed),
            r.channel_hash, "true" if r.feasible else "false",
            _fmt(r.power_w), _fmt(r.power_dbm), str(r.sweeps),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_aggregate_csv(aggregates: list[AggregateRecord], path) -> None:
    lines = [AGGREGATE_HEADER]
    for a in aggregates:
        lines.append(",".join([
            a.protocol, a.scenario, str(a.m_elements),
            _fmt(a.mean_power_dbm), _fmt(a.ci95_db), _fmt(a.feasibility_rate),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_aggregate_csv(path) -> list[AggregateRecord]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != AGGREGATE_HEADER:
        raise ConfigError(f"{path}: not an aggregate CSV")
    out = []
    for line in lines[1:]:
        p, s, m, mean, ci, rate = line.split(",")
        out.append(AggregateRecord(p, s, int(m), float(mean), float(ci), float(rate)))
    return out


def emit_plot_data(aggregates: list[AggregateRecord], out_dir,
                   scenarios: tuple[str, ...] | None = None) -> list[Path]:
    """One plot-ready CSV per scenario: M, then mean dBm and CI per protocol.

    Raises OSError annotated with the offending path on write failures.
    """
    out_dir = Path(out_dir)
    if scenarios is None:
        scenarios = tuple(sorted({a.scenario for a in aggregates}))
    paths = []
    for scenario in scenarios:
        rows = [a for a in aggregates if a.scenario == scenario]
        protocols = [p.value for p in PROTOCOL_ORDER if any(r.protocol == p.value for r in rows)]
        ms = sorted({r.m_elements for r in rows})
        header = ["M"]
        for p in protocols:
            header += [f"{p}_mean_dbm", f"{p}_ci95_db"]
        lines = [",".join(header)]
        by_key = {(r.protocol, r.m_elements): r for r in rows}
        for m in ms:
            cells = [str(m)]
            for p in protocols:
                r = by_key.get((p, m))
                cells += [_fmt(r.mean_power_dbm), _fmt(r.ci95_db)] if r else ["", ""]
            lines.append(",".join(cells))
        path = out_dir / f"plot_{scenario}.csv"
        try:
            path.write_text("\n".join(lines) + "\n")
        except OSError as exc:
            raise OSError(f"writing plot data to {path}: {exc}") from exc
        paths.append(path)
    return paths


def write_outputs(records, aggregates, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trials_csv(records, out_dir / "trials.csv")
    write_aggregate_csv(aggregates, out_dir / "aggregate.csv")
    emit_plot_data(aggregates, out_dir)


def default_config() -> SweepConfig:
    """The experiment defaults: M in {10..50}, 100 trials, all protocols,
    both scenarios, unicast rates 1/1 and multicast rate 3.46 bit/s/Hz."""
    return SweepConfig()


_GEOMETRY_KEYS = {"ap_pos", "ris_pos", "user_t_pos", "user_r_pos"}
_FADING_KEYS = {"pathloss_exponent", "c0_db", "rician_k", "noise_dbm"}
_GRID_KEYS = {"n_phase", "n_amplitude", "max_sweeps", "improve_tol_db", "restarts"}
_TOP_KEYS = {
    "geometry", "fading", "n_antennas", "element_counts", "protocols",
    "scenarios", "unicast_rates", "multicast_rate", "grids", "trials",
    "master_seed", "out_dir", "ts_power_metric",
}


def _check_keys(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} field(s): {', '.join(sorted(unknown))}")


def config_from_dict(data: dict) -> SweepConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(data, _TOP_KEYS, "config")
    kwargs: dict = {}
    if "geometry" in data:
        _check_keys(data["geometry"], _GEOMETRY_KEYS, "geometry")
        kwargs["geometry"] = Geometry(**{k: tuple(v) for k, v in data["geometry"].items()})
    if "fading" in data:
        _check_keys(data["fading"], _FADING_KEYS, "fading")
        kwargs["fading"] = FadingParams(**data["fading"])
    if "grids" in data:
        _check_keys(data["grids"], _GRID_KEYS, "grids")
        kwargs["grids"] = GridSpec(**data["grids"])
    if "protocols" in data:
        try:
            kwargs["protocols"] = tuple(Protocol(p) for p in data["protocols"])
        except ValueError as exc:
            raise ConfigError(f"unknown protocol in config: {exc}") from exc
    for key in ("n_antennas", "element_counts", "scenarios", "unicast_rates",
                "multicast_rate", "trials", "master_seed", "out_dir",
                "ts_power_metric"):
        if key in data:
            kwargs[key] = data[key]
    try:
        return SweepConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SweepConfig:
    """Parse a JSON sweep config; unknown fields are rejected."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)
