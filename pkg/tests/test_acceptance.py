"""Acceptance battery: one PASS/FAIL verdict line per criterion.

Tolerances and runtime budgets are fixed values; nothing here is tuned to
the observed numbers.
"""
import math
import subprocess
import sys
import time

import numpy as np

from crossmap import closed_forms
from crossmap.bundles import HopfTarget
from crossmap.crosses import (Ball, canonicalize, complex_proj, exp_chart, log_chart,
                              octonion_plane, phi_m, phi_m_inv, quat_proj, real_proj, sphere)
from crossmap.radial import make_profile
from crossmap.targets import parse_target
from crossmap.validate import (chi2_cell_test, hopf_vs_sphere_test, jacobian_check,
                               ks_radial_test)

CLOSED_ROWS = [sphere(1), sphere(2), real_proj(1), real_proj(2), complex_proj(1),
               complex_proj(2), complex_proj(3)]
KS_TARGETS = ([f"ball:{d}" for d in range(1, 5)] + [f"sphere:{n}" for n in range(1, 5)]
              + [f"rp:{n}" for n in range(1, 4)] + [f"cp:{n}" for n in range(1, 4)]
              + ["hp:1", "hp:2", "op2", "hopf:1", "hopf:2"])
SEEDS = (1, 2, 3)
ROUND_TRIP_SPACES = [sphere(1), sphere(2), sphere(3), sphere(4), real_proj(1), real_proj(2),
                     real_proj(3), complex_proj(1), complex_proj(2), complex_proj(3),
                     quat_proj(1), quat_proj(2), octonion_plane(), Ball(2), Ball(3)]
PROFILES = ([("ball", d) for d in range(1, 5)] + [("sphere", n) for n in range(1, 5)]
            + [("rp", n) for n in range(1, 4)] + [("cp", n) for n in range(1, 4)]
            + [("hp", 1), ("hp", 2), ("op2", None), ("gaussian", 3), ("stereo2d", None)])


def test_criterion_1_closed_forms(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for space in CLOSED_ROWS:
        x = rng.random((1000, space.d))
        a = canonicalize(space, phi_m(space, x))
        b = canonicalize(space, closed_forms.closed_form_map(space)(x))
        worst = max(worst, float(np.max(np.abs(a - b))))
    x = rng.random((1000, 3))
    a = HopfTarget(1).phi(x)
    b = closed_forms.hopf_s3(x[:, :2], x[:, 2])
    worst = max(worst, float(np.max(np.abs(a - b))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 5.0
    assert record(1, ok, f"closed-form vs pipeline max |diff| = {worst:.2e} (tol 1e-9), "
                         f"{dt:.2f} s (budget 5 s)")


def test_criterion_2_radial_ks(record):
    t0 = time.perf_counter()
    failed = []
    worst = 0.0
    for text in KS_TARGETS:
        target = parse_target(text)
        for seed in SEEDS:
            rep = ks_radial_test(target, 100_000, seed=seed)
            worst = max(worst, rep.statistic / rep.threshold)
            if not rep.passed:
                failed.append(f"{text}/seed{seed}")
    dt = time.perf_counter() - t0
    ok = not failed and dt < 120.0
    assert record(2, ok, f"{len(KS_TARGETS)} targets x {len(SEEDS)} seeds, N=1e5, "
                         f"worst D/threshold = {worst:.3f}, failures = {failed or 'none'}, "
                         f"{dt:.1f} s (budget 120 s)")


def test_criterion_3_fig2_cells(record):
    t0 = time.perf_counter()
    rep = chi2_cell_test(sphere(2), 37, 1_000_000, seed=1)
    neg = chi2_cell_test(sphere(2), 37, 1_000_000, seed=1, warp=True)
    dt = time.perf_counter() - t0
    ok = rep.passed and not neg.passed and dt < 60.0
    assert record(3, ok, f"S2 k=37 (1369 cells) chi2 = {rep.statistic:.1f} <= "
                         f"{rep.threshold:.1f}; warped control chi2 = {neg.statistic:.3g} "
                         f"(must fail); {dt:.1f} s (budget 60 s)")


def test_criterion_4_jacobian(record):
    rng = np.random.default_rng(4)
    worst, failed = 0.0, []
    for kind, n in PROFILES:
        prof = make_profile(kind, n)
        for _ in range(20):
            y = rng.standard_normal(prof.d)
            rep = jacobian_check(prof, y, h=1e-5, rtol=1e-5)
            worst = max(worst, rep.statistic)
            if not rep.passed:
                failed.append(f"{kind}{n or ''}")
    ok = not failed
    assert record(4, ok, f"{len(PROFILES)} profiles x 20 points, worst relative error "
                         f"{worst:.2e} (tol 1e-5), failures = {sorted(set(failed)) or 'none'}")


def test_criterion_5_round_trips(record):
    rng = np.random.default_rng(5)
    phi_err = var_err = log_err = 0.0
    for space in ROUND_TRIP_SPACES:
        x = rng.random((1000, space.dim))
        phi_err = max(phi_err, float(np.max(np.abs(space.phi_inv(space.phi(x)) - x))))
    for kind, n in PROFILES:
        prof = make_profile(kind, n)
        # chart inputs are the Gaussian images of random cube points
        y = rng.standard_normal((1000, prof.d))
        var_err = max(var_err, float(np.max(np.abs(prof.varphi_inv(prof.varphi(y)) - y))))
    for space in ROUND_TRIP_SPACES[:13]:
        v = rng.standard_normal((1000, space.d))
        v *= (rng.random(1000) * 0.999 * space.D / np.linalg.norm(v, axis=1))[:, None]
        log_err = max(log_err, float(np.max(np.abs(log_chart(space, exp_chart(space, v)) - v))))
    ok = phi_err <= 1e-8 and var_err <= 1e-9 and log_err <= 1e-9
    assert record(5, ok, f"phi_inv o phi {phi_err:.2e} (tol 1e-8); varphi_inv o varphi "
                         f"{var_err:.2e} (tol 1e-9); log o exp {log_err:.2e} (tol 1e-9)")


def test_criterion_6_hopf_vs_direct(record):
    rep = hopf_vs_sphere_test(1, 100_000, seed=1)
    assert record(6, rep.passed, f"two-sample KS on S3 radii D = {rep.statistic:.5f} <= "
                                 f"{rep.threshold:.5f} (alpha 0.01, N = 1e5 each)")


def test_criterion_7_numeric_rho(record):
    r = np.linspace(0.0, 6.0, 100)
    worst = 0.0
    for kind, n in [("sphere", 2), ("rp", 2), ("cp", 1), ("cp", 2), ("cp", 3)]:
        prof = make_profile(kind, n)
        worst = max(worst, float(np.max(np.abs(prof.rho_of_r(r, numeric=True)
                                               - prof.rho_of_r(r)))))
    assert record(7, worst <= 1e-10, f"numeric vs closed rho max |diff| = {worst:.2e} "
                                     f"(tol 1e-10) on 100-point grid over [0, 6]")


def test_criterion_8_determinism(record, tmp_path):
    outs = []
    base = [sys.executable, "-m", "crossmap", "gen", "--target", "sphere:3", "--count", "20000",
            "--seed", "11", "--format", "bin"]
    for i, threads in enumerate((1, 1, 8, 8)):
        path = tmp_path / f"run{i}.bin"
        code = subprocess.run(base + ["--threads", str(threads), "-o", str(path)]).returncode
        assert code == 0
        outs.append(path.read_bytes())
    ok = all(o == outs[0] for o in outs)
    assert record(8, ok, "gen output byte-identical over 2 runs x threads {1, 8} "
                         f"({len(outs[0])} bytes)")
