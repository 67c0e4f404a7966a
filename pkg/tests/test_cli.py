"""Command-line interface: parsing, outputs, config merging, determinism."""

import json

import pytest
from click.testing import CliRunner

from cubicmem.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def test_verify_cochain_passes(runner):
    res = runner.invoke(main, ["verify", "--suite", "cochain",
                               "--complex", "hypercubic:d=4,L=2",
                               "--trials", "50"])
    assert res.exit_code == 0
    assert "pass" in res.output


def test_verify_commute_small_torus(runner):
    res = runner.invoke(main, ["verify", "--suite", "commute",
                               "--complex", "hypercubic:d=2,L=2"])
    assert res.exit_code == 0


def test_bad_complex_spec_is_usage_error(runner):
    res = runner.invoke(main, ["verify", "--suite", "cochain",
                               "--complex", "dodecahedral:d=4,L=2"])
    assert res.exit_code == 2
    res = runner.invoke(main, ["verify", "--suite", "cochain",
                               "--complex", "hypercubic"])
    assert res.exit_code == 2


def test_ccz_suite_requires_simplicial_5d(runner):
    res = runner.invoke(main, ["verify", "--suite", "ccz",
                               "--complex", "hypercubic:d=4,L=2"])
    assert res.exit_code == 2


def test_gsd_model(runner):
    res = runner.invoke(main, ["compute", "gsd", "--model", "s2s2s1"])
    assert res.exit_code == 0
    assert "= 22" in res.output


def test_gsd_requires_exactly_one_target(runner):
    assert runner.invoke(main, ["compute", "gsd"]).exit_code == 2
    res = runner.invoke(main, ["compute", "gsd", "--model", "t4",
                               "--complex", "hypercubic:d=2,L=2"])
    assert res.exit_code == 2


def test_gsd_lattice(runner):
    res = runner.invoke(main, ["compute", "gsd",
                               "--complex", "hypercubic:d=2,L=2"])
    assert res.exit_code == 0
    assert "= 22" in res.output


def test_gates_wu_ccz_table(runner):
    res = runner.invoke(main, ["compute", "gates", "--manifold", "wu",
                               "--gate", "ccz"])
    assert res.exit_code == 0
    assert "111 -> 111  -1" in res.output


def test_gates_unknown_manifold(runner):
    res = runner.invoke(main, ["compute", "gates", "--manifold", "k3",
                               "--gate", "ccz"])
    assert res.exit_code == 2


def test_distance_small_torus(runner):
    res = runner.invoke(main, ["compute", "distance",
                               "--complex", "hypercubic:d=2,L=2"])
    assert res.exit_code == 0
    assert "n_phys=24 distance=2" in res.output


def test_tc_command(runner):
    res = runner.invoke(main, ["compute", "tc", "--excitation-dim", "1",
                               "--mu", "8.84"])
    assert res.exit_code == 0
    assert "0.917731" in res.output


def test_simulate_memory_outputs_are_deterministic(runner, tmp_path):
    args = ["simulate", "memory", "--complex", "hypercubic:d=4,L=2",
            "--beta", "1.5", "--sweeps", "10", "--trials", "20",
            "--seed", "7"]
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert runner.invoke(main, args + ["--out", str(out_a)]).exit_code == 0
    assert runner.invoke(main, args + ["--out", str(out_b)]).exit_code == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    sj = json.loads((tmp_path / "a.csv.json").read_text())
    assert sj == json.loads((tmp_path / "b.csv.json").read_text())
    assert sj["trials"] == 20 and sj["seed"] == 7
    header = out_a.read_text().splitlines()[0]
    assert header == "L,beta,t,trials,failures,p_fail,ci_lo,ci_hi"


def test_simulate_pcrit_writes_summary(runner, tmp_path):
    out = tmp_path / "p.csv"
    res = runner.invoke(main, ["simulate", "pcrit",
                               "--complex", "hypercubic:d=4,L=2",
                               "--beta", "0.0", "--samples", "10",
                               "--seed", "3", "--out", str(out)])
    assert res.exit_code == 0
    sj = json.loads((tmp_path / "p.csv.json").read_text())
    assert sj["command"] == "pcrit" and sj["samples"] == 10
    assert sj["p_crit"] >= 0.9


def test_config_file_merging(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"beta": 0.25, "trials": 12}))
    out = tmp_path / "m.csv"
    res = runner.invoke(main, ["simulate", "memory",
                               "--complex", "hypercubic:d=4,L=2",
                               "--sweeps", "5", "--trials", "8",
                               "--config", str(cfg), "--out", str(out)])
    assert res.exit_code == 0
    sj = json.loads((tmp_path / "m.csv.json").read_text())
    # config supplies beta; the explicit --trials flag wins over the config
    assert sj["beta"] == 0.25
    assert sj["trials"] == 8


def test_config_unknown_key_rejected(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma": 1.0}))
    res = runner.invoke(main, ["simulate", "memory",
                               "--complex", "hypercubic:d=4,L=2",
                               "--config", str(cfg)])
    assert res.exit_code == 2
