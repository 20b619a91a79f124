from __future__ import annotations

import json
import math
import subprocess
import warnings

import numpy as np
import pytest

from rrgedge import cli
from rrgedge.errors import ConfigError, InvalidParams
from rrgedge.experiments import (
    ExperimentConfig,
    RegimeWarning,
    _run_records,
    parse_config_text,
    run_edge_fluctuation,
    run_identity_suite,
    run_interpolation_smoke,
    run_ramanujan_fraction,
    run_rigidity,
    wilson_interval,
)


def quiet(**kw) -> ExperimentConfig:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        return ExperimentConfig(**kw)


# ---------------------------------------------------------------- config


@pytest.mark.parametrize(
    "kw",
    [
        {"n": 5, "d": 3},
        {"n": 10, "d": 3, "num_graphs": 0},
        {"n": 10, "d": 10},
        {"n": 10, "d": 4, "threads": 0},
        {"n": 10, "d": 4, "t": -0.1},
        {"n": 10, "d": 4, "method": "magic"},
        {"n": "ten", "d": 4},
    ],
)
def test_config_rejects(kw):
    with pytest.raises(ConfigError):
        quiet(**kw)


def test_regime_warning():
    with pytest.warns(RegimeWarning):
        ExperimentConfig(n=100, d=10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ExperimentConfig(n=10_000, d=10)


def test_config_hash_is_git_blob_hash(tmp_path):
    cfg = quiet(n=100, d=4, seed=9)
    data = cfg.canonical_json()
    ref = subprocess.run(["git", "hash-object", "--stdin"], input=data.encode(),
                         capture_output=True, check=True).stdout.decode().strip()
    assert cfg.content_hash() == ref
    # scheduling and output fields do not enter the hash
    assert cfg.replace(threads=4, output_path=str(tmp_path)).content_hash() == cfg.content_hash()
    assert cfg.replace(seed=10).content_hash() != cfg.content_hash()


def test_parse_config_text():
    vals = parse_config_text("# comment\nn = 100\nd=4  # trailing\ntiming=yes\nmcmc-burnin=none\n")
    assert vals == {"n": "100", "d": "4", "timing": True, "mcmc_burnin": None}
    cfg = ExperimentConfig.from_mapping(vals)
    assert (cfg.n, cfg.d, cfg.timing, cfg.mcmc_burnin) == (100, 4, True, None)
    with pytest.raises(ConfigError):
        parse_config_text("n 100")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"n": 10, "d": 4, "colour": "red"})


def test_wilson_interval():
    lo, hi = wilson_interval(69, 100)
    assert lo < 0.69 < hi
    # closed form
    z, p, m = 1.959963984540054, 0.69, 100
    centre = (p + z * z / (2 * m)) / (1 + z * z / m)
    half = z / (1 + z * z / m) * math.sqrt(p * (1 - p) / m + z * z / (4 * m * m))
    assert (lo, hi) == pytest.approx((centre - half, centre + half), abs=1e-12)
    assert wilson_interval(0, 1)[0] == 0.0 and wilson_interval(1, 1)[1] == 1.0


# ---------------------------------------------------------------- campaigns


def test_ramanujan_small():
    rep = run_ramanujan_fraction(quiet(n=200, d=6, num_graphs=12, seed=4))
    flags = [r.ramanujan for r in rep.records]
    assert len(rep.records) == 12
    assert rep.aggregate["fraction"] == np.mean(flags)
    lo, hi = rep.aggregate["ci95"]
    assert 0 <= lo <= rep.aggregate["fraction"] <= hi <= 1
    assert rep.aggregate["reference"] == 0.69
    for r in rep.records:
        assert r.ramanujan == (max(r.lambda2, -r.lambdaN) <= 2)


def test_ramanujan_single_graph():
    rep = run_ramanujan_fraction(quiet(n=50, d=4, num_graphs=1, seed=1))
    assert rep.aggregate["fraction"] in (0.0, 1.0)
    assert 0 <= rep.aggregate["ci95"][0] <= rep.aggregate["ci95"][1] <= 1


def test_ramanujan_complete_graph():
    with pytest.warns(RegimeWarning):
        cfg = ExperimentConfig(n=8, d=7, num_graphs=3)
    rep = run_ramanujan_fraction(cfg)
    assert rep.aggregate["fraction"] == 1.0
    for r in rep.records:
        assert r.lambda2 == pytest.approx(-1 / math.sqrt(6), abs=1e-12)


def test_edge_fluct_small():
    rep = run_edge_fluctuation(quiet(n=400, d=6, num_graphs=30, seed=2))
    agg = rep.aggregate
    assert agg["num_ok"] == 30
    assert agg["mean_x"] < 0
    assert sum(c for _, _, c in rep.histogram) == 30
    assert 0 <= agg["ks_x"] <= 1
    x = [400 ** (2 / 3) * (r.lambda2 - 2) for r in rep.records]
    assert agg["mean_x"] == pytest.approx(np.mean(x))


def test_interp_trivial_and_t0():
    cfg = quiet(n=120, d=6, num_graphs=4, seed=5, t=0.3)
    rep = run_interpolation_smoke(cfg)
    assert rep.aggregate["max_trivial_error"] <= 1e-8
    base = run_edge_fluctuation(cfg)
    zero = run_interpolation_smoke(cfg.replace(t=0.0))
    for a, b in zip(base.records, zero.records):
        assert a.lambda2 == pytest.approx(b.lambda2, abs=1e-9)
        assert a.lambdaN == pytest.approx(b.lambdaN, abs=1e-9)


def test_rigidity_small():
    rep = run_rigidity(quiet(n=256, d=6, num_graphs=4, seed=3))
    assert rep.aggregate["num_ok"] == 4
    assert np.isfinite(rep.aggregate["p99_max_ratio"])
    with pytest.raises(ConfigError):
        run_rigidity(quiet(n=4096, d=6, num_graphs=1))


def _flaky_task(cfg, g_rng, l_rng, w_rng):
    if int(g_rng.integers(0, 3)) == 0:
        raise InvalidParams("injected failure")
    return {"lambda2": 1.0, "lambdaN": -1.0}


def test_failures_are_quarantined():
    cfg = quiet(n=20, d=4, num_graphs=30, seed=0)
    recs = _run_records(_flaky_task, cfg)
    bad = [r for r in recs if not r.ok]
    assert 0 < len(bad) < 30
    assert all("injected failure" in r.error for r in bad)
    assert [r.idx for r in recs] == list(range(30))


def test_identity_suite_and_fault():
    rep = run_identity_suite(quiet(n=64, d=4))
    assert rep.passed, [c for c in rep.checks if not c["passed"]]
    bad = run_identity_suite(quiet(n=64, d=4, inject_fault=True))
    failed = {c["name"] for c in bad.checks if not c["passed"]}
    assert failed == {"ward"}


# ---------------------------------------------------------------- reproducibility


def test_reproducible_across_threads(tmp_path):
    base = quiet(n=150, d=6, num_graphs=8, seed=77)
    one = run_ramanujan_fraction(base)
    two = run_ramanujan_fraction(base.replace(threads=2))
    assert one.samples_csv() == two.samples_csv()
    assert one.to_json(timing=False) == two.to_json(timing=False)
    one.write(tmp_path / "a")
    two.write(tmp_path / "b")
    assert (tmp_path / "a/samples.csv").read_bytes() == (tmp_path / "b/samples.csv").read_bytes()


def test_report_files(tmp_path):
    rep = run_edge_fluctuation(quiet(n=100, d=4, num_graphs=5, seed=1, timing=True))
    paths = rep.write(tmp_path, timing=True)
    assert {p.name for p in paths} == {"report.json", "samples.csv", "histogram.csv"}
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["config_hash"] == quiet(n=100, d=4, num_graphs=5, seed=1).content_hash()
    assert len(data["records"]) == 5
    head, *rows = (tmp_path / "samples.csv").read_text().splitlines()
    assert head == "idx,seed,lambda2,lambdaN,ramanujan,wall_ms"
    assert all(row.split(",")[5] for row in rows)
    assert (tmp_path / "histogram.csv").read_text().startswith("bin_left,bin_right,count\n")


# ---------------------------------------------------------------- CLI


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["ramanujan", "--n", "5", "--d", "3"]) == 3
    assert cli.main(["identities", "--inject-fault"]) == 2
    assert cli.main(["identities"]) == 0
    out = tmp_path / "run"
    assert cli.main(["ramanujan", "--n", "100", "--d", "4", "--graphs", "3", "--out", str(out)]) == 0
    assert (out / "samples.csv").exists()
    with pytest.raises(SystemExit) as exc:
        cli.main(["ramanujan", "--bogus"])
    assert exc.value.code == 3


def test_cli_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 100\nd = 4\nnum_graphs = 2\nseed = 5\n")
    out = tmp_path / "o"
    assert cli.main(["ramanujan", "--config", str(cfg), "--seed", "6", "--out", str(out)]) == 0
    data = json.loads((out / "report.json").read_text())
    assert data["config"]["seed"] == 6 and data["config"]["num_graphs"] == 2
    assert data["scheduling"]["output_path"] == str(out)
    cfg.write_text("n = 100\nd = 4\nfoo = 1\n")
    assert cli.main(["ramanujan", "--config", str(cfg)]) == 3
    assert cli.main(["ramanujan", "--config", str(tmp_path / "missing.cfg")]) == 3


def test_cli_tw_table(tmp_path):
    assert cli.main(["tw-table", "--order", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "tw2.csv").read_text().startswith("s,q,cdf\n")


def test_module_entry_point():
    r = subprocess.run(["python3", "-m", "rrgedge", "ramanujan", "--n", "7", "--d", "3"],
                       capture_output=True, text=True)
    assert r.returncode == 3
    assert "config error" in r.stderr
