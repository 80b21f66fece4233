"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import csv
import json
import time

import numpy as np
import pytest

from qfi_workbench.cli import main
from qfi_workbench.generator import generator_spectral
from qfi_workbench.metrology import crb_experiment, sld_measurement
from qfi_workbench.model import spin_amplitude, spin_direction, spin_direction_general
from qfi_workbench.qfi import qfi_max, qfi_report, tensor_power_qfi

TWO_PI = 2 * np.pi


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


@pytest.fixture(scope="module")
def validation(tmp_path_factory):
    out = tmp_path_factory.mktemp("validate") / "report.json"
    start = time.perf_counter()
    code = main(["validate", "--count", "50", "--seed", "0", "--out", str(out)])
    elapsed = time.perf_counter() - start
    return code, json.loads(out.read_text()), elapsed


def test_criterion_1_spin_direction_law(tmp_path, acceptance_log):
    out = tmp_path / "sweep.csv"
    start = time.perf_counter()
    code = main(["sweep-time", "--model", "spin_direction:B=1", "--t-range", f"0:{TWO_PI!r}:201", "--out", str(out)])
    elapsed = time.perf_counter() - start
    _, data = _read_csv(out)
    t, q = data[:, 0], data[:, 1]
    err = np.max(np.abs(q - 4 * np.sin(t) ** 2))
    # grid step is 2pi/200, so a shift by pi is 100 rows
    period_err = np.max(np.abs(q[100:] - q[:101]))
    ok = code == 0 and len(t) == 201 and err <= 1e-8 and period_err <= 1e-8 and elapsed < 1.0
    acceptance_log(1, ok, f"max|F-4sin^2 t|={err:.2e} period(pi) err={period_err:.2e} time={elapsed:.2f}s")
    assert ok


def test_criterion_2_general_direction_law(acceptance_log):
    B, g = 1.3, 0.37
    curves = [
        (spin_direction_general("cos(g)", "0", "sin(g)", B=B), 1.0),
        (spin_direction_general("0.6*cos(2*g)", "0.6*sin(2*g)", "0.8", B=B), 1.44),
    ]
    ts = np.linspace(0, TWO_PI / B, 200)[1:]
    start = time.perf_counter()
    worst = 0.0
    for spec, dn2 in curves:
        for t in ts:
            expected = 4 * dn2 * np.sin(B * t) ** 2
            got = qfi_max(generator_spectral(spec, g, t).h).qfi
            # relative error; zeros of sin(Bt) are measured against the curve peak
            worst = max(worst, abs(got - expected) / max(expected, 4 * dn2 * 1e-6))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and elapsed < 1.0
    acceptance_log(2, ok, f"max rel err={worst:.2e} over |dn|^2 in (1, 1.44) time={elapsed:.2f}s")
    assert ok


def test_criterion_3_amplitude_law(acceptance_log):
    g = 0.8
    ts = np.linspace(0, 5, 201)[1:]
    start = time.perf_counter()
    worst = 0.0
    for coeff, dB in (("g", 1.0), ("g^2", 2 * g)):
        spec = spin_amplitude(coeff)
        for t in ts:
            expected = 4 * dB**2 * t**2
            worst = max(worst, abs(qfi_max(generator_spectral(spec, g, t).h).qfi - expected) / expected)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 1.0
    acceptance_log(3, ok, f"max rel err={worst:.2e} for B=g and B=g^2 time={elapsed:.2f}s")
    assert ok


def test_criterion_4_heisenberg_scaling(acceptance_log):
    start = time.perf_counter()
    worst = 0.0
    for spec, g, t in ((spin_direction(1.0), 0.3, np.pi / 2), (spin_amplitude("g"), 0.3, 1.0)):
        single = tensor_power_qfi(spec, g, t, 1)
        for N in (1, 2, 3):
            ratio = tensor_power_qfi(spec, g, t, N) / single
            worst = max(worst, abs(ratio - N**2) / N**2)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 5.0
    acceptance_log(4, ok, f"max rel deviation from N^2={worst:.2e} time={elapsed:.2f}s")
    assert ok


def test_criterion_5_route_equivalence(validation, acceptance_log):
    code, report, elapsed = validation
    instances = report["instances"]
    dims = sorted({inst["dim"] for inst in instances})
    dist = max(inst["max_route_distance"] for inst in instances)
    herm = max(max(inst["hermiticity_defects"].values()) for inst in instances)
    ok = code == 0 and len(instances) == 50 and dims == [2, 3, 4, 6] and dist <= 1e-6 and herm <= 1e-8 \
        and elapsed < 30.0
    acceptance_log(5, ok, f"max route distance={dist:.2e} max hermiticity defect={herm:.2e} time={elapsed:.2f}s")
    assert ok


def test_criterion_6_superoperator_structure(validation, acceptance_log):
    _, report, _ = validation
    herm = max(inst["superoperator_hermiticity_defect"] for inst in report["instances"])
    spec_err = max(inst["superoperator_spectrum_error"] for inst in report["instances"])
    ok = herm <= 1e-10 and spec_err <= 1e-8
    acceptance_log(6, ok, f"max superoperator hermiticity defect={herm:.2e} spectrum error={spec_err:.2e}")
    assert ok


def test_criterion_7_bound_suite(validation, acceptance_log):
    _, report, _ = validation
    instances = report["instances"]
    spectral = all(inst["checks"]["bound_spectral"] for inst in instances)
    hs = all(inst["checks"]["bound_hilbert_schmidt"] for inst in instances)
    rotation = [inst for inst in instances if inst["kind"] == "rotation"]
    ceiling = bool(rotation) and all(
        inst["ceiling"] is not None and inst["max_qfi_on_grid"] <= inst["ceiling"] + 1e-8 for inst in rotation
    )
    ok = report["bound_t_grid"][2] == 50 and spectral and hs and ceiling
    acceptance_log(7, ok, f"spectral={spectral} hilbert_schmidt={hs} ceiling={ceiling} "
                          f"({len(rotation)} g-independent-spectrum instances)")
    assert ok


def test_criterion_8_sld_consistency(validation, acceptance_log):
    _, report, _ = validation
    worst = max(inst["sld_error"] for inst in report["instances"])
    ok = worst <= 1e-7
    acceptance_log(8, ok, f"max |sld_qfi - 4 Var(h)|={worst:.2e}")
    assert ok


def test_criterion_9_cramer_rao(acceptance_log):
    spec, t = spin_direction(1.0), np.pi / 2
    start = time.perf_counter()
    probe = qfi_report(spec, 0.0, t).optimal_probe
    meas = sld_measurement(spec, probe, 0.0, t)
    rep = crb_experiment(spec, probe, meas, 0.0, t, nu=10_000, replications=200, seed=0)
    elapsed = time.perf_counter() - start
    lo, hi = 0.8 * 2.5e-5, 1.6 * 2.5e-5
    ok = lo <= rep.mse <= hi and abs(rep.f_classical - 4.0) <= 1e-4 and elapsed < 60.0
    acceptance_log(9, ok, f"mse={rep.mse:.3e} in [{lo:.1e}, {hi:.1e}] (mse/crb={rep.mse_over_crb:.3f}) "
                          f"F_cl={rep.f_classical:.8f} time={elapsed:.2f}s")
    assert ok
