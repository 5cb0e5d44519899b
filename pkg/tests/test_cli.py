import json

from starsim.cli import main


def test_sweep_command_writes_outputs(tmp_path):
    out = tmp_path / "results"
    code = main([
        "sweep", "--elements", "4:6:2", "--protocols", "es,ms,conventional",
        "--scenario", "unicast", "--trials", "1", "--seed", "7", "--out", str(out),
    ])
    assert code == 0
    trials = (out / "trials.csv").read_text().strip().splitlines()
    assert trials[0].startswith("protocol,scenario,m_elements,trial")
    assert len(trials) == 1 + 3 * 2  # header + protocols x element counts
    assert (out / "aggregate.csv").exists()
    assert (out / "plot_unicast.csv").exists()


def test_sweep_single_element_count(tmp_path):
    out = tmp_path / "one"
    code = main([
        "sweep", "--elements", "4", "--protocols", "ts", "--scenario", "multicast",
        "--trials", "2", "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    assert (out / "plot_multicast.csv").exists()


def test_run_command_uses_config(tmp_path):
    cfg = {
        "element_counts": [4],
        "protocols": ["es"],
        "scenarios": ["unicast"],
        "trials": 1,
        "grids": {"n_phase": 8, "n_amplitude": 5, "restarts": 2},
        "master_seed": 11,
        "out_dir": str(tmp_path / "from_config"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path)]) == 0
    assert (tmp_path / "from_config" / "trials.csv").exists()
    # --out overrides the configured directory
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "other")]) == 0
    assert (tmp_path / "other" / "trials.csv").exists()


def test_plotdata_command(tmp_path):
    out = tmp_path / "replot"
    main(["sweep", "--elements", "4", "--protocols", "es,ms", "--scenario", "unicast",
          "--trials", "1", "--seed", "5", "--out", str(out)])
    (out / "plot_unicast.csv").unlink()
    assert main(["plotdata", "--in", str(out)]) == 0
    assert (out / "plot_unicast.csv").exists()


def test_config_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["sweep", "--elements", "5:x:1", "--out", str(tmp_path / "x")]) == 2
    assert main(["plotdata", "--in", str(tmp_path / "nowhere")]) == 2
