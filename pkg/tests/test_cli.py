import json
import subprocess
import sys

import pytest

from srptlab.cli import main

SMALL = {
    "service": {"family": "two_point", "x1": 1.0, "p1": 0.5, "x2": 2.0},
    "interarrival": {"family": "exponential", "rate": 1.0},
    "gamma": 1.0,
    "w0": 1.0,
    "r_values": [3, 5],
    "replications": 12,
    "grid_size": 20,
    "x_levels": [1.5],
    "eps": 0.5,
    "seed": 11,
    "policies": ["srpt", "fifo"],
    "path_samples": 2,
    "rbm_paths": 2000,
    "rbm_steps": 50,
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_demo_prints_departures(capsys):
    assert main(["demo"]) == 0
    out = capsys.readouterr().out
    assert "# departures: D1=4, D2=2" in out
    assert "# departures: D1=2, D2=3" in out
    assert "# departures: D1=3, D2=4" in out
    assert "time,kind,job_index" in out


def test_atom_truncation_level_is_a_config_error(tmp_path, capsys):
    path = _write(tmp_path, {**SMALL, "x_levels": [1.0]})
    assert main(["run", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert "1.0" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize(
    "patch",
    [{"gamma": 10.0}, {"bogus": 1}, {"emit": ["png"]}, {"policies": ["fifo"]}, {"service": {"family": "two_point"}}],
)
def test_bad_configs_exit_2(tmp_path, patch):
    assert main(["validate", "--config", _write(tmp_path, {**SMALL, **patch})]) == 2


def test_missing_config_exits_2(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == 2


def test_validate_prints_assumption_report(tmp_path, capsys):
    assert main(["validate", "--config", _write(tmp_path, SMALL)]) == 0
    rows = json.loads(capsys.readouterr().out)
    names = {row["name"] for row in rows}
    assert {"heavy_traffic", "no_work_above_x_star", "second_moment_convergence"} <= names
    assert all(row["status"] in ("pass", "n/a") for row in rows)


def test_run_is_reproducible_and_thread_independent(tmp_path):
    path = _write(tmp_path, SMALL)
    outs = []
    for k, threads in enumerate((1, 1, 2)):
        out = tmp_path / f"o{k}"
        code = main(["run", "--config", path, "--out", str(out), "--threads", str(threads), "--emit", "csv,json"])
        assert code == 0
        outs.append(out)
    for name in ("report.csv", "paths.csv"):
        ref = (outs[0] / name).read_bytes()
        assert ref
        assert all((o / name).read_bytes() == ref for o in outs[1:])
    header = (outs[0] / "paths.csv").read_text().splitlines()[0]
    assert header.startswith("r,replication,t,Zhat,What,Zhat_below_1.5,What_below_1.5")
    manifest = json.loads((outs[0] / "manifest.json").read_text())
    assert manifest["seed"] == 11


def test_seed_override_changes_output(tmp_path):
    path = _write(tmp_path, SMALL)
    main(["run", "--config", path, "--out", str(tmp_path / "a")])
    main(["run", "--config", path, "--out", str(tmp_path / "b"), "--seed", "12"])
    assert (tmp_path / "a" / "report.csv").read_bytes() != (tmp_path / "b" / "report.csv").read_bytes()


def test_svg_emission(tmp_path):
    path = _write(tmp_path, {**SMALL, "policies": ["srpt"]})
    assert main(["run", "--config", path, "--out", str(tmp_path / "s"), "--emit", "svg"]) == 0
    svgs = sorted(p.name for p in (tmp_path / "s").glob("*.svg"))
    assert "D.svg" in svgs and "ks_What_t0.svg" in svgs


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "srptlab", "demo"], capture_output=True, text=True)
    assert proc.returncode == 0 and "D1=4" in proc.stdout
