"""Acceptance suite: every declared criterion at its stated tolerance.

Run with `pytest -s tests/test_acceptance.py` to see one verdict line per
criterion.  Grids are desk scale (n <= 2048) and the whole suite finishes in
a few minutes.
"""

import math

import numpy as np
import pytest

from proplab import certify, potentials
from proplab.experiments import ExperimentConfig, FLOAT_FORMAT, run_ell_sweep, run_monotonic_decay
from proplab.evolve import WaveState, energy, heisenberg_bracket, wave_mode_blocks
from proplab.operators import (
    dilation_op,
    hermitian,
    laplacian_op,
    make_grid,
    tanh_kernel_curve,
    tanh_observable,
)

_RESULTS: dict = {}


def verdict(num, passed, detail):
    line = f"ACCEPTANCE {num:02d} {'PASS' if passed else 'FAIL'}: {detail}"
    print(line)
    assert passed, line


# ---------------------------------------------------------------------------
# criterion 1 - commutator identity, size and order
# ---------------------------------------------------------------------------

def _criterion1_payload():
    res = certify.compare_tanh_commutator((256, 512, 1024), 20.0, 4.0, spec=None)
    lines = ["n,rel_diff,margin_over_norm,form_diff"]
    diffs = list(res["form_diffs"]) + [float("nan")]
    for i, n in enumerate(res["n_levels"]):
        lines.append(
            ",".join(
                [str(n)]
                + [FLOAT_FORMAT % v for v in (res["rel_diffs"][i], res["margins_over_norm"][i], diffs[i])]
            )
        )
    return res, "\n".join(lines) + "\n"


def test_criterion_01_commutator_identity():
    res, csv_text = _criterion1_payload()
    _RESULTS["c1_csv"] = csv_text
    size_ok = res["rel_diffs"][-1] <= 1e-2
    margin_ok = all(m >= -1e-8 for m in res["margins_over_norm"])
    order = res["observed_orders"][-1]
    order_ok = 1.7 <= order <= 2.3
    verdict(
        1,
        size_ok and margin_ok and order_ok,
        f"identity rel diff at n=1024 is {res['rel_diffs'][-1]:.2e} (<=1e-2), "
        f"margins/norm >= {min(res['margins_over_norm']):.1e} (>=-1e-8), "
        f"form-convergence order {order:.2f} in [1.7, 2.3]",
    )


# ---------------------------------------------------------------------------
# criterion 2 - threshold sharpness
# ---------------------------------------------------------------------------

def test_criterion_02_threshold_sharpness():
    grid = make_grid(512, 20.0)
    with pytest.warns(Warning):
        t_op = tanh_observable(dilation_op(grid), 0.5)
    direct = certify.commutator(laplacian_op(grid), t_op)
    cert = certify.min_eig_certificate(direct)
    failed_hard = (not cert.passed) and cert.lambda_min < -1e3 * cert.tol
    verdict(
        2,
        failed_hard,
        f"R=0.5 < 2/pi: certificate fails with lambda_min/norm = {cert.lambda_min / cert.norm:.2e}",
    )


# ---------------------------------------------------------------------------
# criterion 3 - kernel formula arbitration
# ---------------------------------------------------------------------------

def test_criterion_03_kernel_arbitration():
    scalar_add = tanh_kernel_curve(0.0, 1.0)
    scalar_alt = tanh_kernel_curve(0.0, 1.0, "alternate")
    gap = scalar_add / scalar_alt
    grid = make_grid(512, 20.0)
    res = certify.kernel_arbitration(grid, 1.0, a_cap=4.0)
    add_err = float(np.abs(res["direct"] / res["addition"] - 1.0).max())
    near0 = np.abs(res["a_values"]) <= 1.0
    alt_miss = float(np.abs(res["direct"] / res["alternate"] - 1.0)[near0].min())
    ok = (
        abs(scalar_add - math.tan(1.0)) < 1e-12
        and abs(gap - 14.6) < 0.2
        and add_err <= 1e-2
        and alt_miss > 0.10
    )
    verdict(
        3,
        ok,
        f"addition curve matches direct diagonal to {add_err:.1e} (<=1e-2); "
        f"alternate misses by >= {alt_miss:.1%}; scalar gap at R=1,a=0 is {gap:.1f}x",
    )


# ---------------------------------------------------------------------------
# criterion 4 - monotonic decay of the incoming mass
# ---------------------------------------------------------------------------

def _c4_config(kind):
    return ExperimentConfig(
        values={
            "grid.n": 1024,
            "grid.half_width": 60.0,
            "potential.kind": kind,
            "potential.c0": 1.0,
            "potential.b": 1.0,
            "observable.R": 4.0,
            "observable.M": 3.0,
            "data.kind": "gaussian",
            "data.x0": 10.0,
            "data.width": 1.0,
            "data.k0": -2.0,
            "time.horizon": 0.0,
            "time.samples": 2000,
        }
    )


def _criterion4_payload():
    out = {}
    for kind in ("none", "lorentzian"):
        out[kind] = run_monotonic_decay(_c4_config(kind))
    csv_text = out["none"].series_csv() + out["lorentzian"].series_csv()
    return out, csv_text


def test_criterion_04_monotonic_decay():
    reports, csv_text = _criterion4_payload()
    _RESULTS["c4_csv"] = csv_text
    ok = True
    details = []
    for kind, rep in reports.items():
        ratio = rep.constants["dissipation_over_bound"]
        ok = ok and rep.violations == 0 and ratio <= 1.01 and rep.passed_certificates
        details.append(f"{kind}: 0 increments above 1e-6 m(0) ({rep.violations}), integral/bound {ratio:.3f}")
    verdict(4, ok, "; ".join(details))


# ---------------------------------------------------------------------------
# criterion 5 - analytic-repulsive example
# ---------------------------------------------------------------------------

def test_criterion_05_analytic_repulsive_example():
    spec = potentials.Lorentzian(1.0, 1.0)
    rng = np.random.default_rng(0)
    xs = rng.uniform(-8.0, 8.0, 100)
    betas = rng.uniform(-0.75, 0.75, 100)
    worst = 0.0
    for x, b in zip(xs, betas):
        got = 2.0 * potentials.dilation_odd_part(spec, x, b)
        ref = 2.0 * x**2 * math.sin(2 * b) / abs(1.0 + np.exp(2j * b) * x**2) ** 2
        worst = max(worst, abs(got - ref))
    grid = make_grid(513, 20.0)
    deltas = {}
    for beta in (0.1, 0.3, 0.7):
        cert = certify.check_analytic_repulsive(spec, beta, grid)
        deltas[beta] = (cert.passed, cert.lambda_min)
    ok = worst <= 1e-12 and all(p and d > 0 for p, d in deltas.values())
    verdict(
        5,
        ok,
        f"closed form matches to {worst:.1e} on 100 samples (<=1e-12); "
        + ", ".join(f"delta0({b})={d:.3f}" for b, (_, d) in deltas.items()),
    )


# ---------------------------------------------------------------------------
# criterion 6 - kinetic term does the work at small angle
# ---------------------------------------------------------------------------

def test_criterion_06_kinetic_term_certificate():
    spec = potentials.SumPotential(
        terms=((1.0, potentials.Lorentzian(1.0, 1.0)), (1.0, potentials.ExponentialTail(0.05, 1.0)))
    )
    grid = make_grid(1025, 40.0)
    hump = potentials.hump_analysis(spec, np.linspace(-20, 20, 4001))
    vir_min = float(np.min(potentials.virial(spec, np.linspace(-20, 20, 2001))))
    full = certify.check_analytic_repulsive(spec, 0.05, grid)
    pot_only = certify.check_analytic_repulsive(spec, 0.05, grid, include_kinetic=False)
    ok = (
        hump["is_one_hump"]
        and vir_min >= 0.0
        and full.passed
        and full.lambda_min > 0
        and not pot_only.passed
    )
    verdict(
        6,
        ok,
        f"full form passes with delta0 = {full.lambda_min:.4f} > 0; potential-only fails "
        f"(lambda_min = {pot_only.lambda_min:.1e} at the hump top, not strictly positive)",
    )


# ---------------------------------------------------------------------------
# criterion 7 - barrier structure across angular momentum
# ---------------------------------------------------------------------------

def test_criterion_07_blackhole_hump_structure():
    xs = np.linspace(-30.0, 60.0, 3001)
    peaks = {}
    all_one_hump = True
    for ell in range(11):
        spec = potentials.BlackHole(mass=1.0, ell=ell)
        res = potentials.hump_analysis(spec, xs)
        all_one_hump = all_one_hump and res["is_one_hump"]
        peaks[ell] = res["peak_radius"]
    rel = abs(peaks[10] - 3.0) / 3.0
    verdict(
        7,
        all_one_hump and rel <= 0.01,
        f"one hump for l=0..10; peak radius at l=10 is {peaks[10]:.4f} ({rel:.2%} from 3)",
    )


# ---------------------------------------------------------------------------
# criterion 8 - wave energy conservation and bracket identities
# ---------------------------------------------------------------------------

def test_criterion_08_wave_energy_and_brackets():
    grid = make_grid(1024, 60.0)
    spec = potentials.BlackHole(mass=1.0, ell=2)
    lap = laplacian_op(grid)
    vvals = np.asarray(potentials.evaluate(spec, grid.points), dtype=float)
    h_op = hermitian(grid, lap.matrix + np.diag(vvals), "H")
    x, w = 10.0, 1.0
    f0 = np.exp(-((grid.points - x) ** 2) / (2 * w * w))
    g0 = np.zeros_like(f0)
    times = np.linspace(0.0, 50.0, 101)
    u, ud = wave_mode_blocks(h_op, f0, g0, times)
    e0 = energy(lap, vvals, WaveState(u=u[:, 0], u_dot=ud[:, 0], t=0.0)).value
    drift = max(
        abs(energy(lap, vvals, WaveState(u=u[:, i], u_dot=ud[:, i], t=t)).value - e0) / e0
        for i, t in enumerate(times)
    )
    state = WaveState(u=u[:, 60], u_dot=ud[:, 60], t=float(times[60]))
    scale = grid.h * np.linalg.norm(state.u) * np.linalg.norm(state.u_dot)
    br_id = abs(heisenberg_bracket(state, np.eye(grid.n)))
    br_fx = abs(heisenberg_bracket(state, np.diag(np.cos(grid.points / 7.0))))
    ok = drift <= 1e-10 and br_id <= 1e-12 * max(1.0, scale) and br_fx <= 1e-12 * max(1.0, scale)
    verdict(
        8,
        ok,
        f"energy drift {drift:.1e} (<=1e-10) over T=50; brackets: identity {br_id:.1e}, "
        f"f(x) {br_fx:.1e} (<=1e-12)",
    )


# ---------------------------------------------------------------------------
# criterion 9 - window decay across the scaling sweep
# ---------------------------------------------------------------------------

def _c9_config():
    return ExperimentConfig(
        values={
            "grid.n": 2048,
            "grid.half_width": 40.0,
            "potential.kind": "lorentzian",
            "potential.c0": 1.0,
            "potential.b": 1.0,
            "data.kind": "window",
            "data.x0": 6.0,
            "data.half": 2.0,
            "sweep.ells": [2, 4, 8, 16, 32],
            "sweep.r0": 2.0,
            "sweep.beta0": 0.1,
            "sweep.slack": 2.0,
            "time.horizon": 30.0,
            "time.samples": 1200,
        }
    )


def _criterion9_payload():
    report = run_ell_sweep(_c9_config())
    return report, report.series_csv()


def test_criterion_09_log_bound_sweep():
    report, csv_text = _criterion9_payload()
    _RESULTS["c9_csv"] = csv_text
    ratio = report.constants["max_over_median"]
    ok = (
        ratio <= 2.0
        and "log-bound-verdict-failed" not in report.flags
        and report.passed_certificates
    )
    per_log = [report.constants[f"per_log_l{e}"] for e in (2, 4, 8, 16, 32)]
    verdict(
        9,
        ok,
        f"I(l)/ln(l) = {[f'{v:.3f}' for v in per_log]}, max/median = {ratio:.2f} (<=2)",
    )


# ---------------------------------------------------------------------------
# criterion 10 - phase-space localization norms
# ---------------------------------------------------------------------------

def test_criterion_10_localization_norms():
    grid = make_grid(1024, 20.0)
    spec = potentials.Lorentzian(1.0, 1.0)
    norms = {d: [certify.localization_norm(spec, e, 5.0, d, grid) for e in (4, 8, 16)] for d in (0.25, 0.9)}
    good = np.array(norms[0.25])
    ctrl = np.array(norms[0.9])
    good_ratios = good[:-1] / good[1:]
    ctrl_ratios = ctrl[:-1] / ctrl[1:]
    ok = bool(np.all(good_ratios >= 4.0) and np.all(ctrl_ratios < 4.0))
    verdict(
        10,
        ok,
        f"delta=1/4 norms {[f'{v:.2e}' for v in good]} (ratios {[f'{r:.1f}' for r in good_ratios]} >= 4); "
        f"delta=0.9 stays O(1) ({[f'{v:.2f}' for v in ctrl]})",
    )


# ---------------------------------------------------------------------------
# criterion 11 - uncertainty certificates
# ---------------------------------------------------------------------------

def test_criterion_11_uncertainty_certificates():
    grid = make_grid(513, 20.0)
    weighted = certify.uncertainty_weighted(grid, 10.0, 2.0)
    interval = certify.uncertainty_interval(grid, 1.0, (-1.0, 1.0))
    domination = certify.kernel_domination_certificate(grid, 8.0, eps=0.1)
    ok = weighted.passed and interval.passed and interval.lambda_min > 0 and domination.passed
    verdict(
        11,
        ok,
        f"weighted (b=10, sigma=2) margin {weighted.margin:.2e}; C(1,[-1,1]) = {interval.lambda_min:.3f} > 0; "
        f"kernel domination (R=8, eps=0.1) margin {domination.margin:.2e}",
    )


# ---------------------------------------------------------------------------
# criterion 12 - determinism of the headline runs
# ---------------------------------------------------------------------------

def test_criterion_12_determinism():
    c1_first = _RESULTS.get("c1_csv") or _criterion1_payload()[1]
    c4_first = _RESULTS.get("c4_csv") or _criterion4_payload()[1]
    c9_first = _RESULTS.get("c9_csv") or _criterion9_payload()[1]
    same1 = _criterion1_payload()[1] == c1_first
    same4 = _criterion4_payload()[1] == c4_first
    same9 = _criterion9_payload()[1] == c9_first
    verdict(
        12,
        same1 and same4 and same9,
        f"reruns byte-identical: commutator study {same1}, monotonic decay {same4}, sweep {same9}",
    )
