"""Acceptance criteria, one test each.

Every test records a one-line verdict; the lines are printed in the pytest
terminal summary (and directly when this file is run as a script).
"""

import filecmp
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from dipolejet.dynamics import DipoleState, ExitSolver, dipole_rhs, integrate_dipole
from dipolejet.freeflow import free_flow, free_flow_jacobian
from dipolejet.geometry import Circle, Ellipse
from dipolejet.global_recon import path_independence, reconstruct_global, taylor_gradient_model
from dipolejet.jet_recovery import (
    build_family,
    estimate_ell_prime,
    lemma_limits_check,
    recover_gradient,
    recover_hessian,
    xi_for_velocity,
)
from dipolejet.potential import PolynomialPotential, ZeroPotential
from dipolejet.su_identity import su_residual
from dipolejet.suites import convex_boundary_points, random_cases, structured_cases, suite_domains, suite_potentials

RESULTS = {}
DISK = Circle((0.0, 1.0), 1.0)
ELLIPSE = Ellipse((0.2, 0.9), (1.3, 0.9))
ORIGIN = np.zeros(2)
LINEAR = PolynomialPotential({(1, 0): 0.1, (0, 1): 0.2})
QUADRATIC = PolynomialPotential({(1, 0): 0.1, (0, 1): 0.2, (0, 2): 0.05})
ROOT = Path(__file__).resolve().parent.parent


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


def fd_jacobian(s, x, y, h=1e-6):
    phi = np.concatenate([x, y])
    J = np.zeros((4, 4))
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        a, b = free_flow(s, *np.split(phi + e, 2)), free_flow(s, *np.split(phi - e, 2))
        J[:, i] = (np.concatenate([a.a_plus, a.a_minus]) - np.concatenate([b.a_plus, b.a_minus])) / (2 * h)
    return J


def test_criterion_01_su_identity():
    t0 = time.perf_counter()
    cases = structured_cases(seed=0)
    res = [su_residual(x, y, Q, D, tol=1e-11, quad_tol=1e-10) for D, Q, x, y in cases]
    dt = time.perf_counter() - t0
    worst = max(res)
    record(1, len(cases) >= 96 and worst < 1e-6 and dt < 60,
           f"{len(cases)} cases, max residual {worst:.2e} (< 1e-6), {dt:.1f} s (< 60 s)")


def test_criterion_02_free_flow():
    worst_traj, worst_jac, ident = 0.0, 0.0, True
    for D, _, x, y in random_cases(12, seed=3, Q=ZeroPotential()):
        tr = integrate_dipole(DipoleState(x, y), ZeroPotential(), 5.0, tol=1e-12)
        for s in np.linspace(0.0, 5.0, 26):
            a, b = tr.state(s), free_flow(s, x, y)
            worst_traj = max(worst_traj, np.abs(np.concatenate([a.a_plus - b.a_plus, a.a_minus - b.a_minus])).max())
        for s in (0.3, 1.0, 4.0):
            worst_jac = max(worst_jac, np.abs(free_flow_jacobian(s, x, y) - fd_jacobian(s, x, y)).max())
        ident &= bool(np.array_equal(free_flow_jacobian(0.0, x, y), np.eye(4)))
    record(2, worst_traj < 1e-10 and worst_jac < 1e-7 and ident,
           f"trajectory gap {worst_traj:.1e} (< 1e-10), Jacobian vs FD {worst_jac:.1e} (< 1e-7), identity at s=0 exact: {ident}")


def test_criterion_03_ell_prime():
    slopes = []
    for D in suite_domains():
        for Q in suite_potentials():
            for p in convex_boundary_points(D, Q, 3):
                fam = build_family(p, Q.grad(p), epsilon=1.0, beta=1.0, delta=0.5, domain=D)
                slopes.append(float(estimate_ell_prime(fam, ExitSolver(Q, D, tol=1e-11), h=0.01).value))
    rel = 0.0
    for eps, beta in ((1.0, 1.0), (2.0, 1.0), (1.0, 0.5), (0.5, 0.8)):
        fam = build_family(ORIGIN, (0, 0), epsilon=eps, beta=beta, delta=0.5, domain=DISK)
        lp = float(estimate_ell_prime(fam, ExitSolver(ZeroPotential(), DISK, tol=1e-12), h=0.01).value)
        rel = max(rel, abs(lp - 2 * beta / eps) / (2 * beta / eps))
    record(3, min(slopes) > 0 and rel < 1e-4,
           f"{len(slopes)} families, min ell'(0) {min(slopes):.3f} (> 0); disk chord oracle rel error {rel:.1e} (< 1e-4)")


def test_criterion_04_gradient():
    t0 = time.perf_counter()
    worst, n = 0.0, 0
    for D in (DISK, ELLIPSE):
        for Q in (LINEAR, QUADRATIC):
            solver = ExitSolver(Q, D, tol=1e-11)
            for p in convex_boundary_points(D, Q, 20):
                g = recover_gradient(p, D, solver, Q_outside=Q)
                worst = max(worst, np.linalg.norm(g.grad - Q.grad(g.point)) / np.linalg.norm(Q.grad(g.point)))
                n += 1
    zero = 0.0
    for D in (DISK, ELLIPSE):
        solver = ExitSolver(ZeroPotential(), D, tol=1e-11)
        for th in np.linspace(0, 2 * math.pi, 20, endpoint=False):
            zero = max(zero, np.abs(recover_gradient(D.gamma(th), D, solver, Q_outside=ZeroPotential()).grad).max())
    dt = time.perf_counter() - t0
    record(4, worst < 1e-3 and zero < 1e-9 and dt < 180,
           f"{n} points, max rel error {worst:.1e} (< 1e-3); Q=0 max |grad| {zero:.1e} (< 1e-9); {dt:.1f} s (< 180 s)")


def test_criterion_05_hessian():
    Q = PolynomialPotential({(0, 2): 0.05})
    h = recover_hessian(ORIGIN, DISK, ExitSolver(Q, DISK, tol=1e-12), Q)
    rel = abs(h.matrix[1, 1] - 0.1) / 0.1
    record(5, rel < 0.05 and h.asymmetry < h.asymmetry_uncertainty,
           f"d22 Q = {h.matrix[1, 1]:.6f} (rel error {rel:.1e} < 5e-2); asymmetry {h.asymmetry:.1e} < uncertainty {h.asymmetry_uncertainty:.1e}")


def test_criterion_06_lemma_limits():
    Q1 = PolynomialPotential({(0, 2): 0.05})
    Q2 = PolynomialPotential({(0, 2): 0.05, (0, 3): 0.01})
    r1 = lemma_limits_check(1, 1, build_family(ORIGIN, Q1.grad(ORIGIN), domain=DISK), Q1, DISK)
    r2 = lemma_limits_check(2, 2, build_family(ORIGIN, Q2.grad(ORIGIN), domain=DISK), Q2, DISK)
    record(6, r1.discrepancy < 1e-2 and r2.discrepancy < 2e-2,
           f"k=eta=1 discrepancy {r1.discrepancy:.1e} (< 1e-2); k=eta=2 discrepancy {r2.discrepancy:.1e} (< 2e-2)")


def test_criterion_07_plus_block_vanishes():
    worst, n = 0.0, 0
    for D in suite_domains():
        for Q in suite_potentials():
            for p in convex_boundary_points(D, Q, 2):
                fam = build_family(p, Q.grad(p), domain=D)
                worst = max(worst, np.abs(lemma_limits_check(1, 0, fam, Q, D).numeric).max())
                n += 1
    record(7, worst < 1e-6, f"{n} families, max |a+ block| {worst:.1e} (< 1e-6)")


def test_criterion_08_global_reconstruction():
    t0 = time.perf_counter()
    rec = reconstruct_global(DISK, QUADRATIC, ORIGIN, order=2, grid_n=50, quad_tol=1e-10)
    s = rec.stats()
    model = taylor_gradient_model(rec.jet)
    probe = rec.points[:: max(1, len(rec.points) // 40)]
    pi = max(path_independence(model, QUADRATIC, DISK, rec.margin, x, 1e-10) for x in probe)
    dt = time.perf_counter() - t0
    record(8, s["n_failed"] == 0 and s["sup_rel_error"] < 2e-2 and pi < 2e-10 and dt < 300,
           f"{s['n_points']} grid points, sup rel error {s['sup_rel_error']:.1e} (< 2e-2), "
           f"path independence {pi:.1e} (< 2e-10), {dt:.1f} s (< 300 s)")


def test_criterion_09_tangency():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(200):
        Q = PolynomialPotential({(1, 0): rng.normal(0, 0.2), (0, 1): rng.normal(0, 0.2), (1, 1): rng.normal(0, 0.1)})
        p = rng.uniform(-1, 1, 2)
        v = rng.uniform(0.2, 2.0) * np.array([math.cos(a := rng.uniform(0, 2 * math.pi)), math.sin(a)])
        if np.linalg.norm(v - Q.perp_grad(p)) < 1e-2:
            continue
        vp, _ = dipole_rhs(DipoleState(p, xi_for_velocity(p, v, Q.grad(p))), Q)
        worst = max(worst, np.abs(vp - v).max())
    xi1 = xi_for_velocity(ORIGIN, (1 / math.pi, 0), (0, 0))
    circle = 0.0
    for c in (0.05, 0.1, 0.5, 2.0):
        for eps in (0.3, 1.0, 3.0):
            xi = xi_for_velocity(ORIGIN, (eps, 0), (c, 0))
            circle = max(circle, abs(xi[1] ** 2 - xi[0] * (1 / (math.pi * c) - xi[0])))
    record(9, worst < 1e-12 and xi1[0] == 0.0 and circle < 1e-12,
           f"round trip {worst:.1e} (< 1e-12); case (1) xi1 = {xi1[0]}; case (2) circle relation {circle:.1e} (< 1e-12)")


def test_criterion_10_determinism(tmp_path):
    cfg = ROOT / "configs" / "disk_quadratic.json"
    same = True
    for sub, files in (("verify-su", ["su_residuals.csv"]), ("recover-jet", ["jet.json"]),
                       ("reconstruct", ["grid.csv", "error.svg", "reconstruct_summary.json"])):
        for run in ("a", "b"):
            subprocess.run([sys.executable, "-m", "dipolejet.cli", sub, "--config", str(cfg), "--out", str(tmp_path / run)], check=True)
        same &= all(filecmp.cmp(tmp_path / "a" / f, tmp_path / "b" / f, shallow=False) for f in files)
    record(10, same, f"two independent runs byte-identical: {same}")


def summary_lines():
    out = []
    for n in range(1, 11):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            out.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            out.append(f"criterion {n:2d}: FAIL  (did not complete)")
    return out


if __name__ == "__main__":
    import tempfile

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
