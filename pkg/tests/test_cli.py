import json

import pytest

from srlab import cli, experiments
from srlab.dictionary import Dictionary
from srlab.errors import ConfigError, SchemaMismatch


def run(argv, capsys=None):
    return cli.main([str(a) for a in argv])


def test_gen_dict(tmp_path):
    assert run(["gen-dict", "--n", 8, "--rate", 0.5, "--seed", 3, "--out", tmp_path]) == 0
    C = Dictionary.load(tmp_path / "dictionary.srld")
    assert (C.n, C.M) == (8, 16) and C.meta["seed"] == 3 and C.meta["rate"] == 0.5


def test_bounds_table(tmp_path):
    assert run(["bounds", "--n", 64, 128, "--rate", 0.25, "--k", 1, 2, "--out", tmp_path]) == 0
    lines = (tmp_path / "bounds-table.csv").read_text().splitlines()
    assert len(lines) == 5
    meta = json.loads((tmp_path / "bounds-table.meta.json").read_text())
    assert meta["seed"] == 0 and meta["kernel_backend"] in ("cython", "python")
    assert {"version", "git_describe", "wall_time_s", "config"} <= set(meta)


def test_invalid_config_writes_nothing(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(["approx", "--n", 16, "--M", 32, "--k", 1, "--trials", 0, "--out", out]) == 2
    assert not out.exists()
    assert "ConfigError" in capsys.readouterr().err


def test_sweep_needs_config(tmp_path):
    assert run(["sweep", "--out", tmp_path]) == 2


def test_kind_mismatch(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('kind = "bounds-table"\n[grid]\nn = [8]\nM = [4]\nk = [1]\n')
    assert run(["approx", "--config", cfg, "--out", tmp_path]) == 2
    assert run(["sweep", "--config", cfg, "--out", tmp_path, "--format", "json", "--plot"]) == 0
    assert json.loads((tmp_path / "bounds-table.json").read_text())[0]["n"] == 8
    assert (tmp_path / "bounds-table.svg").read_text().startswith("<svg")


@pytest.mark.parametrize("argv", [
    ["approx", "--n", 12, "--M", 24, "--k", 1, 2, "--trials", 300, "--method", "omp"],
    ["refine", "--n", 16, "--rate", 0.5, "--stages", 3, "--trials", 300],
    ["quant", "--n", 8, "--M", 16, "--k", 1, 2, "--l", 4, "--trials", 100],
])
def test_thread_count_invariance(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv + ["--seed", 5, "--threads", 1, "--out", a]) == 0
    assert run(argv + ["--seed", 5, "--threads", 3, "--out", b]) == 0
    name = next(a.glob("*.csv")).name
    assert (a / name).read_bytes() == (b / name).read_bytes()
    assert run(["compare", a / name, b / name]) == 0


def test_compare_detects_deviation(tmp_path, capsys):
    (tmp_path / "a.csv").write_text("x,y\n1.0,2.0\n")
    (tmp_path / "b.csv").write_text("x,y\n1.0,2.1\n")
    assert run(["compare", tmp_path / "a.csv", tmp_path / "b.csv", "--tolerance", 0.01]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["failed_columns"] == ["y"]
    (tmp_path / "c.csv").write_text("x,z\n1.0,2.0\n")
    with pytest.raises(SchemaMismatch):
        experiments.compare(tmp_path / "a.csv", tmp_path / "c.csv", 0.0)
    assert run(["compare", tmp_path / "a.csv", tmp_path / "c.csv"]) == 2


def test_validate_rejects():
    good = {"kind": "approx-sweep", "grid": {"n": [8], "M": [4], "k": [1]}}
    experiments.validate(good)
    bad = [
        {"kind": "nope"},
        {**good, "seed": -1},
        {**good, "threads": 0},
        {**good, "params": {"trials": 1}},
        {**good, "params": {"bogus": 1}},
        {**good, "grid": {"n": [8], "M": [4], "rate": [1.0], "k": [1]}},
        {**good, "extra": 1},
    ]
    for raw in bad:
        with pytest.raises(ConfigError):
            experiments.validate(raw)
