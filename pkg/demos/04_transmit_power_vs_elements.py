"""A reduced transmit-power-versus-elements experiment.

Runs the Monte Carlo harness on a smaller grid than the full default
(fewer trials and element counts) so it finishes in about a minute, then
prints the mean-power table and writes the same CSV outputs the CLI
produces.  For the full-scale experiment use:

    starsim sweep --elements 10:50:10 --trials 100 --scenario both --out results
"""
from pathlib import Path

from starsim import GridSpec, default_config, run_sweep
from starsim.harness import SweepConfig, write_outputs

config = SweepConfig(
    element_counts=(8, 16, 24),
    trials=20,
    grids=GridSpec(),
    master_seed=default_config().master_seed,
)

records, aggregates = run_sweep(config)
out_dir = Path("demo_results")
write_outputs(records, aggregates, out_dir)

for scenario in config.scenarios:
    print(f"\nmean transmit power, {scenario} (dBm, {config.trials} trials):")
    protocols = [p.value for p in config.protocols]
    print("   M  " + "".join(f"{p:>14s}" for p in protocols))
    for m in config.element_counts:
        row = {a.protocol: a.mean_power_dbm for a in aggregates
               if a.scenario == scenario and a.m_elements == m}
        print(f"  {m:2d}  " + "".join(f"{row[p]:14.3f}" for p in protocols))

print(f"\nwrote trials.csv, aggregate.csv and plot CSVs to {out_dir}/")
print("every protocol sees the same fading per (M, trial); energy splitting")
print("is never above mode switching, the fixed split, or coupled phases on")
print("any single trial thanks to the warm-start chain")
