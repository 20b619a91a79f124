"""Acceptance suite: one test per criterion, at the stated sizes and tolerances.

Criteria 8 to 10 are Monte Carlo campaigns and take several minutes each on
one core.  Each test records a PASS/FAIL line that is repeated in the pytest
terminal summary.
"""

from __future__ import annotations

import math
import time

import numpy as np

from rrgedge import dbm, free_conv, limit_laws, spectral, tracy_widom
from rrgedge.experiments import (
    STANDARD_FORESTS,
    ExperimentConfig,
    run_edge_fluctuation,
    run_ramanujan_fraction,
    run_rigidity,
    self_consistency_grid,
)
from rrgedge.graphs import forest_sum, random_regular_graph

# ---------------------------------------------------------------- exact identities


def test_criterion_01_green_identities(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    ward = rows = ghexp = 0.0
    pairs = 0
    for n in (64, 256):
        for d in (4, 8):
            for _ in range(5):
                g = random_regular_graph(n, d, seed=rng)
                z = complex(rng.uniform(-2.5, 2.5), 10 ** rng.uniform(-2, 0))
                G = spectral.green_function(g, z)
                ward = max(ward, spectral.ward_residual(G))
                rows = max(rows, spectral.row_sum_residual(G))
                ghexp = max(ghexp, spectral.ghexp_residual(g, G))
                pairs += 1
    secs = time.perf_counter() - start
    ok = pairs == 20 and ward <= 1e-10 and rows <= 1e-10 and ghexp <= 1e-9 and secs < 10
    criterion(1, ok, f"ward {ward:.1e}, row sums {rows:.1e}, GH {ghexp:.1e}, {secs:.1f}s")
    assert ok


def test_criterion_02_forest_sum_rule(criterion):
    start = time.perf_counter()
    n, d = 32, 4
    mismatches = []
    rng = np.random.default_rng(202)
    for _ in range(10):
        g = random_regular_graph(n, d, seed=rng)
        for name, f in STANDARD_FORESTS.items():
            got = forest_sum(g, f)
            want = n**f.theta * d ** len(f.edges)
            if got != want:
                mismatches.append((name, got, want))
        got = forest_sum(g, STANDARD_FORESTS["path2"], distinct=True)
        if got != n * d * (d - 1):
            mismatches.append(("path2 distinct", got, n * d * (d - 1)))
    secs = time.perf_counter() - start
    ok = not mismatches and secs < 5
    criterion(2, ok, f"{len(mismatches)} mismatches over 10 graphs x 6 sums, {secs:.1f}s")
    assert ok, mismatches


def test_criterion_03_self_consistency(criterion):
    start = time.perf_counter()
    zs = self_consistency_grid()
    sc = max(limit_laws.sc_residual(z) for z in zs)
    worst, resummed = 0.0, 0
    for d in (5, 8, 20, 100):
        for z in zs:
            v, by_series = limit_laws.p_inf_value(z, limit_laws.m_d(z, d), d)
            worst = max(worst, abs(v))
            resummed += not by_series
    secs = time.perf_counter() - start
    ok = len(zs) == 100 and sc <= 1e-12 and worst <= 1e-10 and secs < 2
    criterion(3, ok, f"semicircle {sc:.1e}, P_inf {worst:.1e} "
                     f"({resummed} of 400 points resummed), {secs:.2f}s")
    assert ok


def test_criterion_04_tree_oracle(criterion):
    start = time.perf_counter()
    d, z = 3, 1j
    errs = {}
    for depth in (8, 11, 14):
        errs[depth] = [
            abs(limit_laws.tree_green_oracle(d, depth, z, k) - limit_laws.tree_green_closed_form(d, z, k))
            for k in (0, 1, 2)
        ]
    secs = time.perf_counter() - start
    monotone = all(errs[8][k] > errs[11][k] > errs[14][k] for k in range(3))
    ok = max(errs[14]) <= 1e-3 and monotone and secs < 30
    criterion(4, ok, f"depth-14 error {max(errs[14]):.1e}, monotone {monotone}, {secs:.1f}s")
    assert ok


def test_criterion_05_constrained_goe(criterion):
    start = time.perf_counter()
    cov = dbm.covariance_check(8, 100_000, seed=505)
    worst_z = max(abs(v["z"]) for v in cov.values())
    w = dbm.sample_constrained_goe(8, seed=506).entries
    rowsum = float(np.abs(w.sum(axis=1)).max())
    ibp = dbm.ibp_residual(8, 100_000, seed=507, F="quadratic")
    secs = time.perf_counter() - start
    # zero row sums hold to accumulation precision 1e-12 N
    ok = len(cov) == 6 and worst_z <= 3 and rowsum <= 1e-12 * 8 and ibp <= 4 and secs < 60
    criterion(5, ok, f"max |z| {worst_z:.2f}, |W1| {rowsum:.1e}, IBP {ibp:.2f} se, {secs:.1f}s")
    assert ok


def test_criterion_06_free_convolution(criterion):
    start = time.perf_counter()
    h = 1e-3
    edge_res = fd_err = 0.0
    for d in (8, 100):
        for t in (0.1, 0.5, 1.0):
            s = free_conv.edge_state(t, d)
            edge_res = max(edge_res, abs(free_conv.md_prime(s.z_plus, d).real * math.expm1(t) - 1))
            slope = (free_conv.edge_state(t + h, d).E_plus - free_conv.edge_state(t - h, d).E_plus) / (2 * h)
            fd_err = max(fd_err, abs(free_conv.edge_velocity(t, d) - slope))
    large_d = max(abs(free_conv.edge_state(t, 1e6).E_plus - 2) for t in (0.1, 0.5, 1.0))
    secs = time.perf_counter() - start
    ok = edge_res <= 1e-10 and fd_err <= 10 * h * h and large_d <= 1e-3 and secs < 5
    criterion(6, ok, f"edge eq {edge_res:.1e}, velocity-FD {fd_err:.1e}, "
                     f"|E(d=1e6)-2| {large_d:.1e}, {secs:.2f}s")
    assert ok


def test_criterion_07_tracy_widom(criterion):
    start = time.perf_counter()
    f1 = tracy_widom.build_table(1)
    f2 = tracy_widom.build_table(2)
    at0 = float(f1(0.0))
    gap = max(abs(float(f2(s)) - tracy_widom.fredholm_f2(s)) for s in (-4.0, -2.0, 0.0, 2.0))
    secs = time.perf_counter() - start
    ok = 0.82 <= at0 <= 0.84 and 0.67 <= at0 * at0 <= 0.71 and gap <= 1e-6 and secs < 20
    criterion(7, ok, f"F1(0) {at0:.6f}, F1(0)^2 {at0 * at0:.6f}, "
                     f"Painleve-Fredholm {gap:.1e}, {secs:.1f}s")
    assert ok


# ---------------------------------------------------------------- Monte Carlo campaigns


def _ks_of(records, n: int) -> float:
    x = n ** (2 / 3) * (np.array([r.lambda2 for r in records if r.ok]) - 2)
    return tracy_widom.ks_distance(x, tracy_widom.get_table(1))


def test_criterion_08_edge_fluctuations(criterion):
    start = time.perf_counter()
    main = run_edge_fluctuation(ExperimentConfig(n=2000, d=12, num_graphs=2000, seed=1))
    ks = main.aggregate["ks_x"]
    mean_x = main.aggregate["mean_x"]
    # trend: 500 graphs per (n, seed); per-graph seeds depend only on (seed, idx),
    # so the (2000, seed 1) run is the first 500 records of the main campaign
    per_run = 500
    trend = {}
    for n in (500, 1000, 2000):
        vals = []
        for seed in (1, 2, 3):
            if n == 2000 and seed == 1:
                vals.append(_ks_of(main.records[:per_run], n))
                continue
            rep = run_edge_fluctuation(ExperimentConfig(n=n, d=12, num_graphs=per_run, seed=seed))
            vals.append(rep.aggregate["ks_x"])
        trend[n] = float(np.mean(vals))
    nonincreasing = trend[500] >= trend[1000] >= trend[2000]
    secs = time.perf_counter() - start
    ok = ks <= 0.08 and nonincreasing
    criterion(8, ok, f"KS {ks:.3f} (limit 0.08), mean X {mean_x:.3f}, sd X {main.aggregate['sd_x']:.3f}, "
                     f"KS trend {trend[500]:.3f}/{trend[1000]:.3f}/{trend[2000]:.3f}, {secs / 60:.1f} min")
    assert ok


def test_criterion_09_ramanujan_fraction(criterion):
    start = time.perf_counter()
    rep = run_ramanujan_fraction(ExperimentConfig(n=1000, d=10, num_graphs=2000, seed=1))
    frac = rep.aggregate["fraction"]
    lo, hi = rep.aggregate["ci95"]
    secs = time.perf_counter() - start
    ok = 0.55 <= frac <= 0.80
    criterion(9, ok, f"fraction {frac:.4f} (95% CI {lo:.3f}-{hi:.3f}; range 0.55-0.80, "
                     f"reference 0.69), {secs / 60:.1f} min")
    assert ok


def test_criterion_10_rigidity(criterion):
    start = time.perf_counter()
    rep = run_rigidity(ExperimentConfig(n=1024, d=12, num_graphs=50, seed=1))
    p99 = rep.aggregate["p99_max_ratio"]
    secs = time.perf_counter() - start
    ok = rep.aggregate["num_ok"] == 50 and p99 <= 20
    criterion(10, ok, f"99th percentile ratio {p99:.2f} (limit 20), "
                      f"bulk median {rep.aggregate['median_bulk_ratio']:.2f}, {secs:.0f}s")
    assert ok


def test_criterion_11_reproducibility(criterion, tmp_path):
    base = ExperimentConfig(n=1000, d=10, num_graphs=24, seed=11)
    blobs = {}
    for label, cfg in (("t1", base), ("t1-again", base), ("t2", base.replace(threads=2)),
                       ("t3", base.replace(threads=3))):
        out = tmp_path / label
        run_ramanujan_fraction(cfg).write(out)
        blobs[label] = (out / "samples.csv").read_bytes()
    ok = len(set(blobs.values())) == 1
    criterion(11, ok, f"samples.csv byte-identical across {sorted(blobs)}")
    assert ok
