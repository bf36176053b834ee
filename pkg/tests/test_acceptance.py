"""End-to-end acceptance checks, one per release criterion.

Run with the report lines visible:

    python3 -m pytest tests/test_acceptance.py -v -s

Criteria 8-12 run Monte-Carlo ensembles and together take a few minutes;
everything else is near-instant.  Each test prints exactly one PASS/FAIL
line with the measured numbers.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np

from catparity import (
    CatParams,
    DecayParams,
    EnsembleConfig,
    FeedbackConfig,
    ProbeChannelSpec,
    apply_outcome,
    build_kraus,
    density,
    entanglement_parity_branches,
    expected_contraction,
    feedback_step,
    fidelity,
    initial_density,
    make_filter,
    nmeas_lambert,
    optimize_alpha,
    phaseflip_counterexample,
    poisson_pmf,
    product_curve,
    random_density,
    rate_generator,
    rates,
    root_channel_demo,
    run_ensemble,
    solve_nmeas,
    steady_state,
    trajectory_rng,
    xi_from_bitflips,
)
from catparity.oracle import derive_kraus
from catparity.qmath import BELL_KET

GRID = [(a2, eta) for eta in (0.5, 0.6, 0.75, 0.9, 1.0) for a2 in (0.25, 1.0, 2.0, 4.0, 8.0)]
KEY_ORDER = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_kraus_matches_independent_derivation():
    t0 = time.perf_counter()
    worst = 0.0
    for a2, eta in GRID:
        built = build_kraus(CatParams(a2, eta))
        derived = derive_kraus(CatParams(a2, eta))
        for key, op in zip(KEY_ORDER, built.operators()):
            worst = max(worst, float(np.max(np.abs(op - derived[key]))))
    elapsed = time.perf_counter() - t0
    _report(
        1,
        worst <= 1e-10 and elapsed < 1.0,
        f"max |build - derive| = {worst:.3e} over {len(GRID)} points in {elapsed:.3f} s",
    )


def test_criterion_02_povm_completeness():
    worst = 0.0
    for a2, eta in GRID:
        ops = build_kraus(CatParams(a2, eta)).operators()
        total = sum(op.conj().T @ op for op in ops)
        worst = max(worst, float(np.max(np.abs(total - np.eye(4)))))
    _report(2, worst <= 1e-12, f"max |sum M^dag M - I| = {worst:.3e}")


def test_criterion_03_structural_zeros_and_parity_invariance():
    ket_even = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)
    rng = np.random.default_rng(30)
    exact_zero = True
    worst_leak = 0.0
    worst_eigen = 0.0
    for a2, eta in ((2.0, 0.75), (1.0, 0.6), (4.0, 0.9)):
        ks = build_kraus(CatParams(a2, eta))
        m_pp, m_pm, m_mp, m_mm = ks.operators()
        exact_zero &= not np.any(m_pm @ ket_even) and not np.any(m_mp @ ket_even)
        # random states of definite parity keep that parity under both readings
        for block in ((0, 3), (1, 2)):
            for _ in range(20):
                g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
                sub = g @ g.conj().T
                sub /= np.trace(sub).real
                rho = np.zeros((4, 4), dtype=complex)
                for r, br in enumerate(block):
                    for c, bc in enumerate(block):
                        rho[br, bc] = sub[r, c]
                other = tuple(set(range(4)) - set(block))
                for outcome in (1, -1):
                    post = apply_outcome(rho, ks, outcome)
                    leak = sum(post[k, k].real for k in other)
                    worst_leak = max(worst_leak, abs(leak))
        # basis eigenstates are strict fixed points of every reading
        for k in range(4):
            rho = np.zeros((4, 4), dtype=complex)
            rho[k, k] = 1.0
            for outcome in (1, -1):
                post = apply_outcome(rho, ks, outcome)
                worst_eigen = max(worst_eigen, float(np.max(np.abs(post - rho))))
    # without loss the phase-aligned Bell states are strict fixed points too
    ks1 = build_kraus(CatParams(2.0, 1.0))
    for name, outcome in (("bell_e_plus", 1), ("bell_o_plus", -1)):
        post = apply_outcome(density(BELL_KET[name]), ks1, outcome)
        worst_eigen = max(worst_eigen, abs(fidelity(post, BELL_KET[name]) - 1.0))
    ok = exact_zero and worst_leak <= 1e-14 and worst_eigen <= 1e-14
    _report(
        3,
        ok,
        "wrong-parity annihilation exact, "
        f"parity leakage <= {worst_leak:.2e}, fixed-point dev <= {worst_eigen:.2e}",
    )


def test_criterion_04_expected_contraction_factors():
    rng = np.random.default_rng(4)
    worst = 0.0
    points = [(0.25, 0.5), (1.0, 0.6), (2.0, 0.75), (4.0, 0.9), (8.0, 0.97)]
    for a2, eta in points:
        ks = build_kraus(CatParams(a2, eta))
        full = -math.expm1(-4.0 * a2)
        f_parity = math.sqrt(-math.expm1(-4.0 * (1.0 - eta) * a2) / full)
        f_coh = math.sqrt(-math.expm1(-4.0 * eta * a2) / full)
        for _ in range(100):
            rho = random_density(rng)
            for which, factor in (("parity", f_parity), ("coherence", f_coh)):
                before, after = expected_contraction(rho, ks, which)
                worst = max(worst, abs(after - factor * before))
    _report(4, worst <= 1e-10, f"max |E[after] - factor x before| = {worst:.3e}")


def test_criterion_05_iteration_count_predictions():
    est_a = solve_nmeas(CatParams(1.63, 0.85))
    est_b = solve_nmeas(CatParams(3.273, 0.70))
    ok = (
        15.5 <= est_a.n_meas <= 18.0
        and abs(est_a.f_meas - 0.990) <= 0.005
        and 350.0 <= est_b.n_meas <= 400.0
        and abs(est_b.f_meas - 0.990) <= 0.005
    )
    _report(
        5,
        ok,
        f"n_meas = {est_a.n_meas:.2f} (f = {est_a.f_meas:.4f}) and "
        f"{est_b.n_meas:.2f} (f = {est_b.f_meas:.4f})",
    )


def test_criterion_06_lambert_shortcut_accuracy():
    worst = 0.0
    checked = 0
    for eta in (0.7, 0.75, 0.8, 0.85, 0.9, 0.95):
        for a2 in (1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0):
            params = CatParams(a2, eta)
            shortcut = nmeas_lambert(params)
            assert shortcut.reliable == (4.0 * (2.0 * eta - 1.0) * a2 >= math.log(100.0))
            if not shortcut.reliable:
                continue
            checked += 1
            exact = solve_nmeas(params).n_meas
            worst = max(worst, abs(shortcut.n_meas - exact) / exact)
    _report(6, checked >= 20 and worst <= 0.05, f"max rel dev {worst:.4f} on {checked} points")


def test_criterion_07_steady_state_in_generator_null_space():
    worst = 0.0
    for a2, eta in ((2.0, 0.75), (1.63, 0.85)):
        rp_rd = rates(CatParams(a2, eta))
        for decay in (None, DecayParams(t1_ratio=3000.0)):
            ss = steady_state(rp_rd, decay)
            residual = float(np.max(np.abs(rate_generator(rp_rd, decay) @ ss.populations)))
            worst = max(worst, residual)
    _report(7, worst <= 1e-8, f"max generator residual = {worst:.3e}")


def test_criterion_08_measurement_only_ensemble_peak():
    cat = CatParams(2.0, 0.75)
    cfg = EnsembleConfig(
        base=FeedbackConfig(cat=cat, steps=600, seed=8),
        trajectories=1000,
        feedback_enabled=False,
    )
    t0 = time.perf_counter()
    res = run_ensemble(cfg, workers=1)
    elapsed = time.perf_counter() - t0
    mean = res.mean["fid_closest"]
    ipk = int(np.argmax(mean))
    peak, peak_step = float(mean[ipk]), int(res.step[ipk])
    prod_peak = float(np.max(product_curve(rates(cat), np.linspace(0.0, 600.0, 4801))))
    n_meas = solve_nmeas(cat).n_meas
    ok = (
        peak > 0.9
        and 0 < ipk < len(mean) - 1
        and float(mean[-1]) < peak - 0.05
        and abs(peak - prod_peak) <= 0.02
        and n_meas / 2.0 <= peak_step <= 2.0 * n_meas
        and elapsed < 60.0
    )
    _report(
        8,
        ok,
        f"peak {peak:.4f} at step {peak_step} (model {prod_peak:.4f} near {n_meas:.1f}), "
        f"final {float(mean[-1]):.4f}, {elapsed:.1f} s single-threaded",
    )


def test_criterion_09_feedback_beats_measurement_only():
    details = []
    ok = True
    for a2 in (2.0, 4.0):
        base = FeedbackConfig(cat=CatParams(a2, 0.75), steps=1000, seed=21)
        fb = run_ensemble(
            EnsembleConfig(base=base, trajectories=500, feedback_enabled=True), workers=4
        )
        nofb = run_ensemble(
            EnsembleConfig(base=base, trajectories=500, feedback_enabled=False), workers=4
        )
        final = float(fb.mean["fid_be_plus"][-1])
        nofb_peak = float(np.max(nofb.mean["fid_be_plus"]))
        # non-decreasing over the final 30%: compare 10 equal bins, allowing
        # 2 standard errors of slack between neighbours
        tail = fb.step >= 701
        bm = fb.mean["fid_be_plus"][tail].reshape(10, -1).mean(axis=1)
        bs = fb.sem["fid_be_plus"][tail].reshape(10, -1).mean(axis=1)
        drops = sum(
            bm[i + 1] < bm[i] - 2.0 * (bs[i] + bs[i + 1]) for i in range(len(bm) - 1)
        )
        ok &= final > nofb_peak and drops == 0
        details.append(f"a2={a2:g}: {final:.4f} > {nofb_peak:.4f}, drops {drops}")
    _report(9, ok, "; ".join(details))


def test_criterion_10_feedback_with_decay_holds_99_percent():
    decay = DecayParams(t1_ratio=3000.0)
    opt = optimize_alpha(0.85, decay)
    base = FeedbackConfig(
        cat=CatParams(opt.alpha2, 0.85),
        decay=decay,
        initial_state="bell_e_plus",
        steps=18000,
        seed=33,
    )
    cfg = EnsembleConfig(base=base, trajectories=1000, feedback_enabled=True, record_every=30)
    t0 = time.perf_counter()
    res = run_ensemble(cfg, workers=4, window=(9000, 18000))
    elapsed = time.perf_counter() - t0
    ok = abs(res.window_mean - 0.99) <= 0.01 and elapsed < 600.0
    _report(
        10,
        ok,
        f"windowed fidelity {res.window_mean:.5f} +- {res.window_sem:.5f} "
        f"at alpha2 = {opt.alpha2:.4f}, {elapsed:.1f} s",
    )


def test_criterion_11_full_and_bell_filters_match():
    cat = CatParams(2.0, 0.75)
    ks = build_kraus(cat)
    mismatches = 0
    worst = 0.0
    for i in range(200):
        cfg_b = FeedbackConfig(cat=cat, filter_mode="bell", steps=500, seed=11)
        cfg_f = FeedbackConfig(cat=cat, filter_mode="full", steps=500, seed=11)
        rho_b = initial_density(cfg_b.initial_state)
        rho_f = initial_density(cfg_f.initial_state)
        fs_b, fs_f = make_filter(cfg_b), make_filter(cfg_f)
        rng_b, rng_f = trajectory_rng(11, i), trajectory_rng(11, i)
        trace_b: list = []
        trace_f: list = []
        for _ in range(500):
            rho_b, fs_b, _ = feedback_step(rho_b, fs_b, cfg_b, ks, rng_b, trace=trace_b)
            rho_f, fs_f, _ = feedback_step(rho_f, fs_f, cfg_f, ks, rng_f, trace=trace_f)
            worst = max(
                worst,
                float(np.max(np.abs(fs_b.bell_populations() - fs_f.bell_populations()))),
            )
        mismatches += sum(
            a.outcome != b.outcome or a.pulse_fired != b.pulse_fired
            for a, b in zip(trace_b, trace_f)
        )
    _report(
        11,
        mismatches == 0 and worst <= 1e-10,
        f"0 decision mismatches expected, saw {mismatches}; max population dev {worst:.2e}",
    )


def test_criterion_12_pictures_agree():
    results = {}
    for picture in ("schrodinger", "heisenberg"):
        base = FeedbackConfig(cat=CatParams(2.0, 0.75), picture=picture, steps=600, seed=5)
        results[picture] = run_ensemble(
            EnsembleConfig(base=base, trajectories=500, feedback_enabled=True), workers=4
        )
    m_s = results["schrodinger"].mean["fid_be_plus"]
    m_h = results["heisenberg"].mean["fid_be_plus"]
    s_s = results["schrodinger"].sem["fid_be_plus"]
    s_h = results["heisenberg"].sem["fid_be_plus"]
    band = 3.0 * np.sqrt(s_s**2 + s_h**2)
    violations = int(np.sum(np.abs(m_s - m_h) > np.maximum(band, 1e-12)))
    _report(
        12,
        violations == 0,
        f"{violations} of {len(m_s)} steps outside 3 SEM, "
        f"max |diff| = {float(np.max(np.abs(m_s - m_h))):.2e}",
    )


def test_criterion_13_abstract_models():
    worst_xi = max(
        abs(xi_from_bitflips(poisson_pmf(lam)) - math.exp(-lam) * math.cosh(lam))
        for lam in (0.1, 0.5, 2.0)
    )
    specs = (
        ProbeChannelSpec(u_c=np.array([[0.0, 1.0], [1.0, 0.0]]), n_root=2),
        ProbeChannelSpec(u_c=np.diag([1.0, 1.0j]), n_root=4),
    )
    roots_ok = all(
        root_channel_demo(spec, parity, n).target_preserved
        for spec in specs
        for parity in ("even", "odd")
        for n in range(3 * spec.n_root + 1)
    )
    flip = phaseflip_counterexample()
    minus = np.array([1.0, 0.0, 0.0, -1.0], dtype=complex) / math.sqrt(2.0)
    flip_dev = abs(abs(np.vdot(minus, flip.target_flipped)) - 1.0)
    worst_ent = 0.0
    for name, sign in (("bell_e_plus", 1), ("bell_o_minus", -1)):
        rho = initial_density(name)
        branches = {out: (p, post) for out, p, post in entanglement_parity_branches(rho)}
        prob, post = branches[sign]
        worst_ent = max(worst_ent, abs(prob - 1.0), float(np.max(np.abs(post - rho))))
    ok = worst_xi <= 1e-12 and roots_ok and flip_dev <= 1e-12 and worst_ent <= 1e-14
    _report(
        13,
        ok,
        f"xi dev {worst_xi:.2e}, roots preserved {roots_ok}, "
        f"flip dev {flip_dev:.2e}, parity circuit dev {worst_ent:.2e}",
    )


def test_criterion_14_csv_determinism_across_workers(tmp_path):
    outputs = []
    for tag, workers in (("a", 1), ("b", 3)):
        path = tmp_path / f"run_{tag}.csv"
        cmd = [
            sys.executable,
            "-m",
            "catparity.cli",
            "ensemble",
            "--alpha2", "2", "--eta", "0.75",
            "--trajectories", "40", "--steps", "60",
            "--seed", "3", "--workers", str(workers),
            "--output", str(path),
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        sidecar = path.parent / (path.name + ".meta.json")
        outputs.append((path.read_bytes(), sidecar.read_bytes()))
    same_csv = outputs[0][0] == outputs[1][0]
    same_meta = outputs[0][1] == outputs[1][1]
    meta = json.loads(outputs[0][1])
    _report(
        14,
        same_csv and same_meta and "workers" not in meta,
        f"csv identical {same_csv}, metadata identical {same_meta} "
        f"({len(outputs[0][0])} bytes, workers 1 vs 3)",
    )
