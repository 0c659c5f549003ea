"""Acceptance criteria 1-10, one recorded PASS/FAIL line each.

The lines are collected in ``conftest.ACCEPTANCE`` and printed in the
terminal summary. Expensive shared results (design taper, cavity sweep)
are computed once per module.
"""

import math
import time

import numpy as np
import pytest
import yaml

from conftest import ACCEPTANCE
from hourglass_sps.axial import purcell
from hourglass_sps.cli import main
from hourglass_sps.config import design_config, sweep_values, without_phonons
from hourglass_sps.dynamics import (
    EmitterCavityParams,
    cavity_yield,
    channel_yields,
    compute_eta,
    evolve,
    indistinguishability,
    indistinguishability_exact,
)
from hourglass_sps.emission import beta, transmission
from hourglass_sps.geometry import GAAS, Layer
from hourglass_sps.phonons import REPRESENTATIVE_INAS, PhononEnv
from hourglass_sps.sweeps import cavity_point, collection_point, emitter_params, read_csv, run_points
from hourglass_sps.taper import taper_transmission, top_taper

from oracles import brute_force_dephased_eta

LAM = 925.0
N_TOP = list(range(1, 16))
OFF = PhononEnv(enabled=False)


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, detail


@pytest.fixture(scope="module")
def cfg():
    return design_config()


@pytest.fixture(scope="module")
def design_taper():
    start = time.perf_counter()
    res = taper_transmission(top_taper(114.0, 930.0, 0.8), LAM)
    return res, time.perf_counter() - start


@pytest.fixture(scope="module")
def cavity_sweep(cfg):
    start = time.perf_counter()
    rows = [cavity_point(cfg, n) for n in N_TOP]
    return rows, time.perf_counter() - start


# value-anchored ------------------------------------------------------------
def test_criterion_01_collection_ceiling(cfg):
    radii = sweep_values(cfg, "fig2", "r_top_nm")
    start = time.perf_counter()
    rows = run_points("fig2", cfg, radii)
    elapsed = time.perf_counter() - start
    gl = np.array([r["gamma_L"] for r in rows])
    k = int(np.argmax(gl))
    ok = len(radii) == 50 and abs(gl[k] - 0.988) <= 0.010 and 850 <= radii[k] <= 1050 and elapsed < 120
    record(1, ok, f"max gamma_L = {gl[k]:.4f} at R_top = {radii[k]:.0f} nm; 50 points in {elapsed:.0f} s")


def test_criterion_02_taper_transmission(design_taper):
    res, elapsed = design_taper
    start = time.perf_counter()
    doubled = taper_transmission(top_taper(114.0, 930.0, 0.8), LAM, n_segments=2 * res.n_segments)
    elapsed_doubled = time.perf_counter() - start
    change = abs(doubled.t11 - res.t11)
    ok = abs(res.t11 - 0.9987) <= 0.005 and change < 1e-4 and elapsed < 300
    record(
        2,
        ok,
        f"T11 = {res.t11:.6f} ({res.n_segments} segments, {elapsed:.0f} s); "
        f"doubling changes it by {change:.1e} ({elapsed_doubled:.0f} s)",
    )


def test_criterion_03_purcell_arithmetic():
    fp = purcell(30000, 28)
    formula = 3 / (4 * math.pi**2) * 30000 / 28
    b = beta(150, 0.05)
    # the quoted 81.4 and 0.999667 are the formula values rounded (exact 81.4188 and 0.99966678)
    ok = abs(fp - formula) <= 1e-6 and round(fp, 1) == 81.4
    ok = ok and abs(b - 150 / 150.05) <= 1e-9 and round(b, 6) == 0.999667 and b > 0.997
    record(3, ok, f"F_p(30000, 28) = {fp:.6f} (formula {formula:.6f}); beta(150, 0.05) = {b:.9f}")


def test_criterion_04_hourglass_anchors(cavity_sweep):
    rows, elapsed = cavity_sweep
    betas = np.array([r["beta"] for r in rows])
    qs = np.array([r["Q"] for r in rows])
    vs = np.array([r["V_n"] for r in rows])
    above = [n for n, q in zip(N_TOP, qs) if q >= 30000]
    crossing = above[0] if above else None
    v_ok = all(20 <= v <= 40 for n, v in zip(N_TOP, vs) if n >= 8)
    beta_ok = bool(np.all(betas > 0.98))
    cross_ok = crossing is not None and abs(crossing - 11) <= 2
    worst = int(N_TOP[int(np.argmin(betas))])
    detail = (
        f"min beta = {betas.min():.4f} at n_top = {worst} ({'ok' if beta_ok else 'below 0.98'}); "
        f"Q crosses 30000 at n_top = {crossing}; V_n(n_top>=8) in [{vs[7:].min():.1f}, {vs[7:].max():.1f}]; "
        f"sweep {elapsed:.0f} s"
    )
    record(4, beta_ok and cross_ok and v_ok and elapsed < 600, detail)


BAD_CAVITY_GRID = [
    # (g, kappa, gamma_b) with kappa >= 50 g
    (1e9, 1e11, 1e7),
    (2e9, 2e11, 5e7),
    (5e9, 5e11, 5e7),
    (1e10, 1e12, 5e7),
    (1e10, 2e12, 2e8),
    (2e10, 2e12, 5e7),
    (2e10, 4e12, 1e8),
    (3e10, 3e12, 5e7),
    (4e10, 8e12, 5e7),
    (5e10, 2.5e12, 1e9),
]


def test_criterion_05_quantum_classical_consistency():
    gbulk = 1e9
    worst = 0.0
    for g, kappa, gb in BAD_CAVITY_GRID:
        p = EmitterCavityParams(g=g, kappa=kappa, gamma_b=gb, gamma_bulk=gbulk)
        expected = beta(4 * g**2 / kappa / gbulk, gb / gbulk)
        worst = max(worst, abs(cavity_yield(p) / expected - 1))
    record(5, worst <= 0.01, f"max relative deviation from beta over {len(BAD_CAVITY_GRID)} points = {worst:.2e}")


def test_criterion_06_analytic_eta_limits():
    unit_err = 0.0
    for g, kappa in ((3.7e10, 6.8e10), (3.7e10, 1e12), (1e10, 1e10)):
        p = EmitterCavityParams(g=g, kappa=kappa, gamma_b=5e7)
        unit_err = max(unit_err, abs(indistinguishability(evolve(p)) - 1), abs(indistinguishability_exact(p) - 1))
    gam = 1e9
    deph_err = 0.0
    for ratio in (0.05, 0.2, 0.5, 1.0, 3.0):
        target = brute_force_dephased_eta(gam, ratio * gam)
        p = EmitterCavityParams(g=0.0, kappa=1e11, gamma_b=gam, gamma_pd=ratio * gam)
        for eta in (indistinguishability(evolve(p, "emitter")), indistinguishability_exact(p, "emitter")):
            deph_err = max(deph_err, abs(eta / target - 1))
        deph_err = max(deph_err, abs(target * (1 + 2 * ratio) - 1))
    ok = unit_err <= 1e-4 and deph_err <= 0.01
    record(6, ok, f"|eta - 1| <= {unit_err:.1e} without dephasing; dephasing oracle max relative error {deph_err:.1e}")


# property-based ------------------------------------------------------------
def interior_max(values):
    k = int(np.argmax(values))
    return 0 < k < len(values) - 1, k


def test_criterion_07_tradeoff_shape(cfg, cavity_sweep, design_taper):
    rows, _ = cavity_sweep
    t11 = design_taper[0].t11
    off_cfg = without_phonons(cfg)
    eta_on, eta_off, eps_eta = [], [], []
    for r in rows:
        ch = r["_character"]
        params = emitter_params(cfg, ch)
        gamma_l = collection_point(cfg, cfg["geometry"]["r_top_nm"], ch.wavelength)["gamma_L"]
        eps = cavity_yield(params) * transmission(gamma_l, t11, min(ch.upward_fraction, 1.0))
        eta = compute_eta(params)
        eta_on.append(eta)
        eps_eta.append(eps * eta)
        eta_off.append(compute_eta(emitter_params(off_cfg, ch)))
    eta_ok, k_eta = interior_max(eta_on)
    ee_ok, k_ee = interior_max(eps_eta)
    flat = bool(np.all(np.diff(eta_off) >= -1e-9))
    detail = (
        f"phonons on: eta max {eta_on[k_eta]:.4f} at n_top = {N_TOP[k_eta]}, "
        f"eps*eta max {eps_eta[k_ee]:.4f} at n_top = {N_TOP[k_ee]}; "
        f"phonons off: eta in [{min(eta_off):.6f}, {max(eta_off):.6f}], non-decreasing = {flat}"
    )
    record(7, eta_ok and ee_ok and flat, detail)


def test_criterion_08_conservation():
    rng = np.random.default_rng(20241016)
    worst_sum = worst_herm = worst_trace = worst_cs = 0.0
    min_eig = np.inf
    for k in range(100):
        g, kappa = 10 ** rng.uniform(8, 12, 2)
        gb = 10 ** rng.uniform(6, 10)
        pd = rng.uniform(0, 1e10) if k % 3 == 0 else 0.0
        env = REPRESENTATIVE_INAS if k % 2 == 0 else OFF
        p = EmitterCavityParams(g=g, kappa=kappa, gamma_b=gb, gamma_pd=pd, phonons=env)
        cav, emi = channel_yields(p)
        worst_sum = max(worst_sum, abs(cav + emi - 1))
        grid = evolve(p, steps=300)
        rho = grid.states
        worst_herm = max(worst_herm, np.max(np.abs(rho - np.conj(np.transpose(rho, (0, 2, 1))))))
        worst_trace = max(worst_trace, np.max(np.abs(np.trace(rho, axis1=1, axis2=2) - 1)))
        min_eig = min(min_eig, np.linalg.eigvalsh(rho).min())
        n = grid.g1.shape[0]
        pop = grid.population
        bound = pop[:n, None] * pop[np.arange(n)[:, None] + np.arange(n)[None, :]]
        # pure-state dynamics saturate the bound; measure the excess against the peak |G1|^2 scale
        worst_cs = max(worst_cs, np.max(np.abs(grid.g1) ** 2 - bound) / pop.max() ** 2)
    ok = worst_sum <= 1e-6 and worst_herm < 1e-10 and worst_trace < 1e-10 and min_eig >= -1e-10 and worst_cs <= 1e-10
    record(
        8,
        ok,
        f"100 sets: |yield sum - 1| <= {worst_sum:.1e}; hermiticity {worst_herm:.1e}; trace {worst_trace:.1e}; "
        f"min eigenvalue {min_eig:.1e}; relative Cauchy-Schwarz excess {worst_cs:.1e}",
    )


def test_criterion_09_unitarity_reciprocity(design_taper):
    res = design_taper[0]
    cone = top_taper(114.0, 930.0, 0.8)
    down = taper_transmission(Layer(GAAS, cone.thickness, 930.0, 114.0), LAM)
    diff = abs(res.t11 - down.t11)
    ok = res.max_unitarity_error <= 1e-6 and down.max_unitarity_error <= 1e-6 and diff <= 1e-8
    record(9, ok, f"junction power balance error {max(res.max_unitarity_error, down.max_unitarity_error):.1e}; "
                  f"|T11 up - T11 down| = {diff:.1e}")


def test_criterion_10_determinism(tmp_path):
    data = {
        "geometry": {"n_top": 4},
        "phonons": {"alpha_ps2": 0.027, "omega_b_per_ps": 2.2, "temperature_k": 4.0},
        "collection": {"taper_segments": 400},
        "sweep": {
            "fig2": {"r_top_nm": [600.0, 930.0, 1500.0]},
            "fig3": {"theta_deg": [2.0, 4.0]},
            "fig4": {"n_top": [3, 4]},
            "fig5": {"n_top": [3, 4]},
        },
    }
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump(data))
    mismatched = []
    for cmd in ("fig2", "fig3", "fig4", "fig5", "evaluate"):
        outputs = []
        for run, jobs in (("a", 1), ("b", 1), ("c", 2)):
            out = tmp_path / run
            assert main([cmd, "--config", str(path), "--out", str(out), "--jobs", str(jobs)]) == 0
            _, cols, rows = read_csv(out / f"{cmd}.csv")
            outputs.append((cols, rows))
        if not outputs[0] == outputs[1] == outputs[2]:
            mismatched.append(cmd)
    record(10, not mismatched, "fig2-fig5 and evaluate rows identical across reruns and --jobs 1/2"
           if not mismatched else f"rows differ for {mismatched}")
