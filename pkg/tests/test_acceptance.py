"""Acceptance criteria 1-9; each test prints one PASS/FAIL line with its measured values."""

import math
import time

import numpy as np
import pytest

from gstable import fracops, sampling, verify
from gstable.cli import main
from gstable.gslaw import SpectralMeasure, StableParams, gs_charfn
from gstable.spectral import DensityField, Grid1D, gs_density

THETAS = np.array([0.25, 0.5, 1.0, 2.0, 4.0])


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, limit=None):
        timed = limit is None or elapsed < limit
        verdict = "PASS" if ok and timed else "FAIL"
        budget = f" (limit {limit:g} s)" if limit is not None else ""
        line = f"criterion {number}: {verdict} {detail}; {elapsed:.2f} s{budget}"
        with capsys.disabled():
            print("\n" + line)
        assert ok and timed, line
    return emit


def test_criterion_1_spectral_suite(report):
    cases = [
        ("lemma1_gamma_shift", {"b": 1.0}),
        ("lemma2_gamma_log", {"b": 1.0}),
        ("prop3_gs_rieszfeller", {"alpha": 1.5, "beta": 0.3, "sigma": 1.0}),
        ("cor4_symmetric_riesz", {"alpha": 1.5, "beta": 0.0, "sigma": 1.3}),
        ("cor6_subordinator", {"alpha": 0.5, "beta": 1.0, "sigma": 1.0}),
        ("prop8_multivariate", {"alpha": 1.5, "measure": SpectralMeasure(
            2, np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0.5, 0.5]))}),
        ("remark9_isotropic", {"alpha": 1.5, "measure": SpectralMeasure.isotropic_measure(2)}),
    ]
    start = time.perf_counter()
    worst = 0.0
    for eq, params in cases:
        rep = verify.verify_spectral_identity(eq, params, t_list=(0.5, 1.0, 2.0, 5.0))
        worst = max(worst, rep.linf)
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-12, f"worst relative residual {worst:.2e} (tol 1e-12)", elapsed, 5.0)


def test_criterion_2_gamma_closed_form(report):
    start = time.perf_counter()
    worst = 0.0
    x = np.linspace(0.01, 20.0, 2000)
    for b in (0.5, 1.0, 2.0):
        rep = verify.verify_gamma_shift_physical(b, x, (1.5, 2.0, 3.0, 5.0))
        closed = next(c for c in verify._flatten(rep.checks) if c.equation == "closed_form")
        worst = max(worst, closed.linf)
    elapsed = time.perf_counter() - start
    report(2, worst <= 1e-14, f"closed-form residual {worst:.2e} (tol 1e-14)", elapsed, 1.0)


def test_criterion_3_laplace(report):
    start = time.perf_counter()
    grid = Grid1D(-40.0, 40.0, 2 ** 14)
    field = gs_density(StableParams(2.0, 0.0, 1.0), grid, 1.0)
    err = float(np.max(np.abs(field.values - 0.5 * np.exp(-np.abs(grid.x)))))
    elapsed = time.perf_counter() - start
    report(3, err <= 1e-6, f"L-inf {err:.2e} (tol 1e-6)", elapsed, 1.0)


def test_criterion_4_operator_cross_oracle(report):
    start = time.perf_counter()
    sizes = (2 ** 10, 2 ** 11, 2 ** 12)
    # probe points lie on every grid of the study
    probe = np.linspace(-5.0, 5.0, 21)
    gauss = lambda y: np.exp(-y * y / 2)
    lines, ok = [], True
    for alpha in (0.5, 1.0, 1.5, 2.0):
        if alpha < 2:
            quad = np.array([fracops.riesz_regularized_quadrature(gauss, x, alpha) for x in probe])
        else:
            quad = (probe ** 2 - 1) * gauss(probe)
        errs = {"gl-spec": [], "gl-quad": [], "spec-quad": []}
        steps = []
        for n in sizes:
            g = Grid1D(-16.0, 16.0, n)
            f = gauss(g.x)
            spec = fracops.riesz_feller_spectral(DensityField(g, f, 0.0, "closed_form"), alpha, whole_line=True)
            gl = fracops.grunwald_letnikov_rf(f, g.h, alpha)
            idx = np.searchsorted(g.x, probe)
            assert np.allclose(g.x[idx], probe, atol=1e-12)
            errs["gl-spec"].append(float(np.max(np.abs(gl - spec))))
            errs["gl-quad"].append(float(np.max(np.abs(gl[idx] - quad))))
            errs["spec-quad"].append(float(np.max(np.abs(spec[idx] - quad))))
            steps.append(g.h)
        good = True
        parts = []
        for pair, e in errs.items():
            C = max(v / h for v, h in zip(e, steps))
            bound = max(1e-6, C * steps[-1])
            good &= e[-1] <= bound
            parts.append(f"{pair} {e[-1]:.1e} (C {C:.2g})")
        gl_err = errs["gl-spec"]
        ratios = [gl_err[i + 1] / gl_err[i] for i in range(len(sizes) - 1)]
        good &= errs["spec-quad"][-1] <= 1e-6 and all(0.4 <= r <= 0.6 for r in ratios)
        ok &= good
        lines.append(f"alpha={alpha:g} {'ok' if good else 'FAIL'}: " + ", ".join(parts)
                     + f", GL ratios {ratios[0]:.3f}/{ratios[1]:.3f}")
    elapsed = time.perf_counter() - start
    report(4, ok, "pairwise <= max(1e-6, C h), GL ratio band [0.4, 0.6]; " + "; ".join(lines), elapsed, 10.0)


def test_criterion_5_physical_residuals(report):
    start = time.perf_counter()
    grid = Grid1D.default()
    budget = verify.BUDGET_FACTOR * verify.calibration_residual(grid)
    ok, parts = True, []
    for a, b in [(2.0, 0.0), (1.0, 0.0), (1.5, 0.5), (0.5, 1.0)]:
        for t in (2.0, 3.0):
            rep = verify.verify_gs_physical(StableParams(a, b), grid, t)
            res = rep.checks[0].linf
            ratio = next(c.linf for c in rep.checks if c.equation == "refinement_ratio")
            ok &= res <= budget and ratio <= verify.REFINEMENT_RATIO
            parts.append(f"({a:g},{b:g},t={t:g}) {res:.2e}/{ratio:.2f}")
    elapsed = time.perf_counter() - start
    report(5, ok, f"budget {budget:.3e}, ratio <= 0.6; residual/ratio " + ", ".join(parts),
              elapsed, 60.0)


def test_criterion_6_first_passage(report):
    start = time.perf_counter()
    rep = verify.verify_first_passage((2.0,))
    leaves = {c.equation: c for c in verify._flatten(rep.checks)}
    pipe = leaves["quadrature_vs_fft"].linf
    ks, crit = leaves["monte_carlo_ks"].linf, leaves["monte_carlo_ks"].tolerance
    decided = leaves["constant_adjudication"].passed
    ok = pipe <= 1e-6 and ks <= crit and decided
    elapsed = time.perf_counter() - start
    report(6, ok, f"quadrature vs FFT {pipe:.1e}, KS {ks:.2e} (crit {crit:.2e}), "
              f"{leaves['constant_adjudication'].notes}", elapsed, 30.0)


def test_criterion_7_monte_carlo_ecf(report):
    start = time.perf_counter()
    n = 10 ** 5
    points = [(a, b) for a in (0.3, 0.5, 0.8, 1.2, 1.5, 1.8) for b in (-1.0, -0.5, 0.0, 0.5, 1.0)]
    points += [(1.0, 0.0), (2.0, 0.0)]
    worst, where = 0.0, None
    for k, (a, b) in enumerate(points):
        p = StableParams(a, b)
        batch = sampling.sample_gs(p, 2.0, n, 1000 + k)
        diff = sampling.ecf(batch, THETAS) - gs_charfn(p, THETAS, 2.0)
        err = float(max(np.max(np.abs(diff.real)), np.max(np.abs(diff.imag))))
        if err > worst:
            worst, where = err, (a, b)
    elapsed = time.perf_counter() - start
    bound = 4 / math.sqrt(n)
    report(7, worst <= bound, f"{len(points)} (alpha,beta) points, worst ECF error {worst:.2e} at "
              f"{where} (bound {bound:.2e})", elapsed, 30.0)


def test_criterion_8_multivariate(report):
    start = time.perf_counter()
    iso = verify.verify_spectral_identity("remark9_isotropic",
                                          {"alpha": 1.5, "measure": SpectralMeasure.isotropic_measure(2)})
    two = verify.verify_spectral_identity("prop8_multivariate", {"alpha": 1.5, "measure": SpectralMeasure(
        2, np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0.5, 0.5]))})
    phys, extra = verify.verify_isotropic_physical(1.5, 2.0, n=512, refine=False)
    ok = iso.linf <= 1e-12 and two.linf <= 1e-12 and phys.passed
    elapsed = time.perf_counter() - start
    report(8, ok, f"isotropic spectral {iso.linf:.1e}, two-atom spectral {two.linf:.1e}, "
              f"2-D physical {phys.linf:.3e} (budget {phys.tolerance:.3e}, 512^2)", elapsed, 60.0)


def test_criterion_9_cli_determinism(report, tmp_path):
    start = time.perf_counter()
    runs = {
        "sample": ["sample", "--law", "gs", "--alpha", "1.5", "--beta", "0.5", "--t", "2", "--count", "20000",
                   "--seed", "7"],
        "isotropic": ["sample", "--law", "isotropic-gs", "--alpha", "1.2", "--dim", "2", "--count", "5000",
                      "--seed", "8"],
        "density": ["density", "--law", "gs", "--alpha", "0.7", "--beta", "-0.4", "--t", "2"],
    }
    same = True
    for name, args in runs.items():
        data = []
        for k, jobs in enumerate(("1", "4")):
            out = tmp_path / f"{name}{k}.csv"
            assert main(args + ["--jobs", jobs, "--out", str(out)]) == 0
            data.append(out.read_bytes())
        same &= data[0] == data[1]
    for k in range(2):
        assert main(["verify", "--eq", "lemma1_gamma_shift", "--out", str(tmp_path / f"v{k}")]) == 0
    same &= ((tmp_path / "v0" / "lemma1_gamma_shift.json").read_bytes()
             == (tmp_path / "v1" / "lemma1_gamma_shift.json").read_bytes())
    elapsed = time.perf_counter() - start
    report(9, same, "repeated CLI runs (jobs 1 and 4) byte-identical", elapsed)
