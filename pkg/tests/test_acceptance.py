"""Acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict that is printed in the
terminal summary (see ``conftest.py``), or directly when this file is run
as a script.
"""

import time

import numpy as np
import pytest

from fairpc import cli, kernels
from fairpc.core import build_gram_set
from fairpc.io import IngestConfig, ingest
from fairpc.metrics import standard_pca_basis
from fairpc.oracle import grid_oracle_2d, random_oracle
from fairpc.orthonormalization import fit, truncate
from fairpc.solvers import (SolverConfig, brent_two_group, dual_gradient, dual_objective,
                            frank_wolfe)

from conftest import ROT_Z, random_grams, random_unit, rotated
from helpers import gaussian_groups_csv, heart_like_csv, rotated_csv

pytestmark = pytest.mark.acceptance

VERDICTS = {}


def record(n, ok, detail):
    VERDICTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, VERDICTS[n]


def two_group_instances():
    out = []
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        n = 2 + seed % 5
        out.append(random_grams(rng, 2, n))
    return out


TWO_GROUP = two_group_instances()


def test_criterion_01_rotated_instance():
    gs = rotated()
    brent_two_group(gs)  # warm caches
    t = time.perf_counter()
    r = brent_two_group(gs)
    elapsed = time.perf_counter() - t
    z_grid, v_grid = grid_oracle_2d(gs, 10**6)
    angle = abs(np.arctan2(r.v[1], r.v[0]) - np.pi / 8)
    checks = {
        "z": abs(r.primal_value - ROT_Z) <= 1e-6 and abs(r.primal_value - z_grid) <= 1e-6,
        "angle": angle <= 1e-5,
        "mu": abs(r.mu.mu[0] - 0.5) <= 1e-6,
        "h1=h2": abs(r.h[0] - r.h[1]) <= 1e-8,
        "z=g": abs(r.duality_gap) <= 1e-8,
        "time": elapsed < 0.05,
    }
    record(1, all(checks.values()),
           f"z={r.primal_value:.10f} grid={z_grid:.10f} angle_err={angle:.1e} "
           f"mu={r.mu.mu[0]:.10f} gap={r.duality_gap:.1e} t={elapsed * 1e3:.2f}ms "
           f"failed={[k for k, v in checks.items() if not v]}")


def test_criterion_02_two_group_optimality():
    t = time.perf_counter()
    bad = []
    for i, gs in enumerate(TWO_GROUP):
        r = brent_two_group(gs)
        z, g = r.primal_value, r.dual_value
        scale = max(1.0, z)
        if gs.n == 2:
            ok = abs(z - grid_oracle_2d(gs, 10**6)[0]) <= 1e-4
        else:
            z_or, _ = random_oracle(gs, 10**4, 100, seed=i)
            ok = z <= z_or + 1e-6 and z >= g - 1e-6
        ok = ok and abs(z - g) <= 1e-6 * scale and abs(r.h[0] - r.h[1]) <= 1e-6 * scale
        if not ok:
            bad.append(i)
    elapsed = time.perf_counter() - t
    record(2, not bad and elapsed < 10, f"{50 - len(bad)}/50 instances ok, t={elapsed:.2f}s")


def test_criterion_03_containment():
    # containment does not depend on the iteration cap, so a shorter
    # Frank-Wolfe run keeps the 20 x sum(r) refits inside the time budget
    cfg = SolverConfig(max_iter_fw=1000)
    t = time.perf_counter()
    bad = []
    for seed in range(20):
        rng = np.random.default_rng(2000 + seed)
        k, n = 1 + seed % 4, 2 + seed % 7
        gs = random_grams(rng, k, n)
        full = fit(gs, n, cfg)
        for r in range(1, n + 1):
            part, head = fit(gs, r, cfg), truncate(full, r)
            same = np.array_equal(part.components, head.components) and all(
                np.array_equal(a.h, b.h) and np.array_equal(a.mu.mu, b.mu.mu)
                for a, b in zip(part.per_iteration, head.per_iteration))
            if not same:
                bad.append((seed, r))
    elapsed = time.perf_counter() - t
    record(3, not bad and elapsed < 10, f"{20 - len({s for s, _ in bad})}/20 instances bitwise "
           f"contained, t={elapsed:.2f}s")


def test_criterion_04_equal_cumulative_losses():
    worst = 0.0
    for gs in TWO_GROUP + [rotated()]:
        H = np.cumsum([r.h for r in fit(gs, gs.n).per_iteration], axis=0)
        rel = np.abs(H[:, 0] - H[:, 1]) / np.maximum(1.0, np.abs(H).max(axis=1))
        worst = max(worst, float(rel.max()))
    record(4, worst <= 1e-5, f"worst relative mismatch {worst:.1e} over 51 instances")


def test_criterion_05_gradient():
    rng = np.random.default_rng(5)
    h = 1e-5
    worst = 0.0
    for i in range(10):
        k = 2 + i % 4
        gs = random_grams(rng, k, 3 + i % 4)
        for _ in range(10):
            mu = 0.1 / k + 0.9 * rng.dirichlet(np.ones(k))
            d = rng.standard_normal(k)
            d -= d.mean()
            d /= np.linalg.norm(d)
            fd = (dual_objective(gs, mu + h * d)[0] - dual_objective(gs, mu - h * d)[0]) / (2 * h)
            an = float(dual_gradient(gs, dual_objective(gs, mu)[1]) @ d)
            worst = max(worst, abs(fd - an) / max(1.0, abs(an)))
    record(5, worst <= 1e-5, f"worst relative FD error {worst:.1e} at 100 points")


def test_criterion_06_weak_duality():
    rng = np.random.default_rng(6)
    worst = -np.inf
    for i in range(200):
        k, n = 1 + i % 5, 1 + (i // 5) % 8
        gs = random_grams(rng, k, n)
        g_max = max(dual_objective(gs, rng.dirichlet(np.ones(k)))[0] for _ in range(50))
        V = random_unit(rng, n, 500)
        z_min = float(kernels.max_loss_batch(np.ascontiguousarray(gs.grams),
                                             np.ascontiguousarray(gs.top_eigenvalues), V).min())
        worst = max(worst, g_max - z_min)
    record(6, worst <= 1e-9, f"max(g - z) over 200 instances = {worst:.3e}")


def test_criterion_07_frank_wolfe_vs_brent():
    worst = max(abs(frank_wolfe(gs).dual_value - brent_two_group(gs).dual_value)
                for gs in TWO_GROUP)
    record(7, worst <= 1e-4, f"max |g_FW - g_Brent| = {worst:.1e} over 50 instances")


def test_criterion_08_multi_group_gap(tmp_path):
    t = time.perf_counter()
    lines, ok = [], True
    for seed in (0, 1, 2):
        ds, _ = ingest(gaussian_groups_csv(tmp_path / f"g{seed}.csv", seed), IngestConfig("group"))
        basis = fit(build_gram_set(ds), 8)
        rel = []
        for res in basis.per_iteration:
            gap, z = res.duality_gap, res.primal_value
            ok = ok and gap >= -1e-8 and gap <= 0.05 * max(1.0, z)
            rel.append(gap / max(1.0, z))
        lines.append(f"seed {seed}: max gap/max(1,z) = {max(rel):.2e} at rank "
                     f"{int(np.argmax(rel)) + 1}")
    elapsed = time.perf_counter() - t
    record(8, ok and elapsed < 30, "; ".join(lines) + f"; t={elapsed:.1f}s")


def test_criterion_09_single_group_is_pca():
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(9000 + seed)
        n = 3 + seed
        gs = random_grams(rng, 1, n, m=2 * n + 5)
        d = min(n, 8)
        C = fit(gs, d).components
        V = standard_pca_basis(gs.pooled(), d).V
        signs = np.sign(np.sum(C * V.T, axis=1))
        worst = max(worst, float(np.abs(C - signs[:, None] * V.T).max()))
    record(9, worst <= 1e-8, f"max entry difference up to sign {worst:.1e}")


def test_criterion_10_cli_runtime(tmp_path):
    warm = rotated_csv(tmp_path / "warm.csv")
    cli.main(["fit", "--input", str(warm), "--group-col", "grp", "--rank", "2",
              "--output", str(tmp_path / "warm")])
    p = heart_like_csv(tmp_path / "heart.csv")
    t = time.perf_counter()
    code = cli.main(["fit", "--input", str(p), "--group-col", "sex", "--rank", "8",
                     "--output", str(tmp_path / "out")])
    elapsed = time.perf_counter() - t
    record(10, code == 0 and elapsed < 1.0, f"297x13, d=8, exit {code}, t={elapsed:.3f}s")


def test_criterion_11_cli_contract(tmp_path):
    import csv
    p = rotated_csv(tmp_path / "rot.csv")
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert cli.main(["losses", "--input", str(p), "--group-col", "grp", "--rank", "2",
                         "--no-standardize", "--baseline", "--output", str(o)]) == 0
    with open(outs[0] / "losses.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    columns_ok = tuple(rows[0].keys()) == cli.LOSS_COLUMNS
    fair = [r for r in rows if r["method"] == "FairPCs"]
    diff = max(abs(float(a["incremental"]) - float(b["incremental"]))
               for a in fair for b in fair if a["rank"] == b["rank"])
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
               for f in ("losses.csv", "manifest.json"))
    record(11, columns_ok and diff <= 1e-5 and same,
           f"columns ok={columns_ok}, max fair incremental diff={diff:.1e}, "
           f"byte-identical={same}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
