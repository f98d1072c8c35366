"""Exit criteria. Each test prints one PASS/FAIL line (also repeated in the pytest summary)."""
import math
import time
from dataclasses import replace

import numpy as np

from wva_sensor.cli import main
from wva_sensor.design import (
    PAPER_TABLE1,
    DesignConstraints,
    paper_config,
    recommend_design,
    regime_phase_limit,
    simulate_point,
    small_signal_velocities,
    sweep_beta_velocity,
    table1_comparison,
)
from wva_sensor.instrument import SpectrometerModel, bin_spectrum, classical_velocity_limit, detection_limit
from wva_sensor.polarization import (
    im_weak_value,
    postselect,
    postselection_probability,
    preselect,
    weak_value_closed_form,
    weak_value_raw,
)
from wva_sensor.sagnac import SagnacConfig, canonical_geometry, phase_from_path, phase_from_velocity
from wva_sensor.spectrum import apply_symmetric_dispersion, fit_center, postselected_spectrum

TABLE1_BETAS = (0.005, 0.001, 0.0005)


def test_c1_postselection_probabilities(criterion):
    devs = []
    for beta in TABLE1_BETAS:
        p = postselection_probability(beta, 0.0)
        devs.append(abs(p / PAPER_TABLE1[beta][1] - 1))
    criterion("C1 post-selection probabilities vs Table 1 (2%)", max(devs) <= 0.02,
              f"max rel dev {max(devs):.2e}")


def test_c2_sensitivity_reproduction(criterion):
    cfg = paper_config()
    t0 = time.perf_counter()
    results = [sweep_beta_velocity(cfg, [b], small_signal_velocities(cfg, b))[0] for b in TABLE1_BETAS]
    rows = table1_comparison(results)
    elapsed = time.perf_counter() - t0
    r1, r2, r3 = results
    row2 = rows[1]
    ok = (
        abs(r1.fitted_k / 3.4e8 - 1) <= 0.05
        and abs(r3.fitted_k / 3.4e10 - 1) <= 0.05
        and abs(r2.fitted_k / r2.k0 - 1) <= 0.01
        and abs(r2.fitted_k / 8.4e9 - 1) <= 0.01
        and row2["note"] is not None
        and "5.4e9" in row2["note"]
        and elapsed < 1.0
    )
    print(f"  discrepancy note (beta=0.001): {row2['note']}")
    criterion(
        "C2 sensitivity k: rows 1/3 within 5% of Table 1, row 2 within 1% of closed form + note",
        ok,
        f"k = {r1.fitted_k:.3e}, {r2.fitted_k:.3e} (k0 {r2.k0:.3e}), {r3.fitted_k:.3e}; {elapsed:.3f} s",
    )


def test_c3_detection_limit(criterion):
    v = detection_limit(5.4e9, SpectrometerModel(0.02))
    criterion("C3 detection limit 0.02 nm / 5.4e9 = 3.7e-12 m/s (1%)", abs(v / 3.7e-12 - 1) <= 0.01,
              f"{v:.4e} m/s")


def test_c4_classical_baseline(criterion, capsys):
    import json

    v_classical = classical_velocity_limit(SagnacConfig(500.0, 1e-6), 1e-7)
    capsys.readouterr()
    code = main(["design"])
    rep = json.loads(capsys.readouterr().out)
    ratio = rep["classical_baseline"]["velocity_limit_mps"] / rep["recommendation"]["predicted_vmin"]
    ok = code == 0 and abs(v_classical / 4.8e-9 - 1) <= 0.01 and ratio >= 1e3
    criterion("C4 classical 4.8e-9 m/s (1%) and weak-value vmin >= 1e3x smaller", ok,
              f"classical {v_classical:.4e} m/s, vmin {rep['recommendation']['predicted_vmin']:.4e} m/s, "
              f"ratio {ratio:.0f}")


def test_c5_spectrum_vs_analytic(criterion):
    rng = np.random.default_rng(20241015)
    cfg = paper_config()
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        beta = float(np.exp(rng.uniform(math.log(5e-4), math.log(0.1))))
        phi = rng.uniform(0.05, 1.0) * regime_phase_limit(cfg, beta)
        v = phi / phase_from_velocity(cfg.sagnac, 1.0) * rng.choice([-1.0, 1.0])
        pt = simulate_point(cfg.with_beta(beta), v)
        fit = fit_center(postselected_spectrum(cfg.probe, pt.weak))
        worst = max(worst, abs(fit.delta_lambda0 / pt.shift.delta_lambda0 - 1))
    elapsed = time.perf_counter() - t0
    criterion("C5 fitted vs analytic shift, 50 random pairs (0.1%, < 5 s)", worst <= 1e-3 and elapsed < 5,
              f"worst rel dev {worst:.2e}; {elapsed:.2f} s")


def test_c6_algebraic_identities(criterion):
    t0 = time.perf_counter()
    pre = preselect()
    rng = np.random.default_rng(6)
    eq11_err = eq13_err = 0.0
    odd = True
    for beta, phi in zip(rng.uniform(1e-6, 0.78, 2000), rng.uniform(-1.0, 1.0, 2000)):
        p_raw = abs(postselect(beta, phi).overlap(pre)) ** 2
        eq11 = math.sin(phi) ** 2 * math.cos(beta) ** 2 + math.sin(beta) ** 2 * math.cos(phi) ** 2
        eq11_err = max(eq11_err, abs(p_raw - eq11))
        wv = weak_value_closed_form(beta, phi)
        eq13_err = max(eq13_err, abs(wv.a_w.imag - wv.im_a_w) / max(1.0, abs(wv.im_a_w)))
        odd &= im_weak_value(beta, -phi) == -im_weak_value(beta, phi)
    ratios = np.array([
        weak_value_raw(pre, postselect(b, f)) / weak_value_closed_form(b, f).a_w
        for b in np.geomspace(1e-4, 0.1, 100)
        for f in np.geomspace(1e-9, 1e-2, 100)
    ])
    spread = float(np.max(np.abs(ratios - ratios[0])) / abs(ratios[0]))
    elapsed = time.perf_counter() - t0
    ok = eq11_err <= 1e-13 and eq13_err <= 1e-13 and spread <= 1e-10 and odd and elapsed < 5
    criterion("C6 algebraic identity suite", ok,
              f"eq11 {eq11_err:.1e}, eq13 {eq13_err:.1e}, raw/closed = {complex(ratios[0]):.12g} "
              f"(spread {spread:.1e}), odd={odd}; {elapsed:.2f} s")


def test_c7_geometry_reduction(criterion):
    cfg = SagnacConfig(nl=500.0, lambda0=840e-9)
    worst = 0.0
    for v in np.geomspace(1e-12, 1e-6, 200):
        geom = canonical_geometry(v, 500.0, side_length=3.0, side_velocity=(0.4 * v, -0.7 * v, 0.0))
        worst = max(worst, abs(phase_from_path(geom, cfg) / phase_from_velocity(cfg, v) - 1))
    perpendicular = canonical_geometry(0.0, 500.0, side_velocity=(2e-9, 0.0, 1e-9))
    zero = phase_from_path(canonical_geometry(0.0, 500.0), cfg) == 0.0 and phase_from_path(perpendicular, cfg) == 0.0
    criterion("C7 canonical geometry reduction (1e-15) and exact zeros", worst <= 1e-15 and zero,
              f"worst rel dev {worst:.1e}")


def test_c8_dispersion_invariance(criterion):
    cfg = paper_config()
    pt = simulate_point(cfg, 2e-12)
    s = postselected_spectrum(cfg.probe, pt.weak)
    c0, p0 = fit_center(s).center, s.total_power()
    center_dev = power_dev = 0.0
    for b in np.linspace(0.5, 10.0, 20):
        out = apply_symmetric_dispersion(s, float(b))
        center_dev = max(center_dev, abs(fit_center(out).center - c0))
        power_dev = max(power_dev, abs(out.total_power() / p0 - 1))
    criterion("C8 symmetric dispersion: center within 1e-4 nm, power within 0.1%",
              center_dev <= 1e-4 and power_dev <= 1e-3,
              f"center dev {center_dev:.1e} nm, power dev {power_dev:.1e}")


def _resimulate(c, rec, template):
    """Return a list of violated constraints for a feasible recommendation."""
    cfg = template.with_beta(rec.beta).with_nl(rec.nl)
    cfg = replace(cfg, probe=replace(cfg.probe, i0=c.i0))
    model = SpectrometerModel(c.resolution, c.floor)
    grid = cfg.probe.default_grid(step=c.resolution / 4)
    problems = []
    if not rec.predicted_vmin <= c.target_velocity:
        problems.append("predicted_vmin > target")
    if not c.i0 * rec.p_postselect >= c.floor:
        problems.append("i0 * p < floor")
    centers = []
    for v in (0.0, c.target_velocity):
        pt = simulate_point(cfg, v)
        binned = bin_spectrum(postselected_spectrum(cfg.probe, pt.weak, grid), model)
        if not binned.intensities.max() >= c.floor:
            problems.append(f"binned signal below floor at v={v}")
            return problems
        centers.append(fit_center(binned).center)
    if not abs(centers[1] - centers[0]) >= c.resolution:
        problems.append("target-velocity shift not resolved after binning")
    return problems


def test_c9_design_soundness(criterion):
    rng = np.random.default_rng(9)
    template = paper_config()
    t0 = time.perf_counter()
    violations, feasible = [], 0
    for _ in range(100):
        i0 = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
        c = DesignConstraints(
            i0=i0,
            floor=i0 * float(np.exp(rng.uniform(math.log(1e-9), math.log(0.6)))),
            resolution=float(np.exp(rng.uniform(math.log(0.01), math.log(0.1)))),
            target_velocity=float(np.exp(rng.uniform(math.log(1e-13), math.log(1e-7)))),
            nl_max=float(np.exp(rng.uniform(math.log(50.0), math.log(5000.0)))),
        )
        rec = recommend_design(c, template)
        if rec.feasible:
            feasible += 1
            problems = _resimulate(c, rec, template)
            if problems:
                violations.append((c, problems))
    elapsed = time.perf_counter() - t0
    criterion("C9 design soundness, 100 random constraint sets (0 violations, < 10 s)",
              not violations and feasible > 0 and elapsed < 10,
              f"{feasible} feasible, {len(violations)} violations; {elapsed:.2f} s")
