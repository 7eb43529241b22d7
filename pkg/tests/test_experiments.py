"""Experiment runners and their reports (small grids; the acceptance suite
runs the full-size configurations)."""

import numpy as np
import pytest

from proplab.experiments import (
    DecayReport,
    ExperimentConfig,
    gaussian_data,
    run_convergence_study,
    run_ell_sweep,
    run_local_decay,
    run_monotonic_decay,
    run_wave_local_decay,
    window_data,
)
from proplab.operators import make_grid


def cfg(**kw):
    base = {
        "grid.n": 257,
        "grid.half_width": 30.0,
        "potential.kind": "none",
        "observable.R": 4.0,
        "observable.M": 3.0,
        "data.kind": "gaussian",
        "data.x0": 8.0,
        "data.width": 1.0,
        "data.k0": -2.0,
        "time.samples": 400,
        "time.horizon": 0.0,
    }
    base.update(kw)
    return ExperimentConfig(values=base)


def test_monotonic_decay_free_flow():
    report = run_monotonic_decay(cfg())
    assert report.violations == 0
    m = report.series["incoming_mass"]
    assert m[0] > m[-1] > -1e-12
    ratio = report.constants["dissipation_over_bound"]
    assert 0.0 < ratio <= 1.01
    assert report.config_hash == cfg().hash()


def test_monotonic_decay_lorentzian():
    report = run_monotonic_decay(cfg(**{"potential.kind": "lorentzian"}))
    assert report.violations == 0
    assert report.passed_certificates
    assert report.constants["dissipation_over_bound"] <= 1.01
    # the bounded observable gains at most twice the squared data norm
    assert report.constants["tanh_gain_over_norm_sq"] <= 2.0


def test_monotonic_decay_crank_nicolson_path():
    report = run_monotonic_decay(
        cfg(**{"evolve.method": "cn", "evolve.dt": 0.002, "time.samples": 100})
    )
    assert report.violations == 0


def test_convergence_monotonicity_target():
    conf = cfg(
        **{
            "grid.n": 65,
            "grid.half_width": 20.0,
            "data.x0": 5.0,
            "time.samples": 100,
            "convergence.target": "monotonicity",
            "convergence.levels": 2,
        }
    )
    report = run_convergence_study(conf)
    worsts = [v for k, v in report.constants.items() if k.startswith("worst_violation")]
    assert len(worsts) == 2
    assert all(w <= 1e-6 for w in worsts)


def test_monotonic_decay_even_rest_data_has_zero_tanh_expectation():
    report = run_monotonic_decay(cfg(**{"data.x0": 0.0, "data.k0": 0.0, "time.samples": 10}))
    assert abs(report.series["tanh_expectation"][0]) < 1e-12


def test_negative_control_attractive_potential():
    report = run_monotonic_decay(
        cfg(**{"potential.kind": "lorentzian", "potential.c0": -5.0, "data.x0": 0.0, "data.k0": 0.0})
    )
    assert "hypothesis-violated" in report.flags
    assert report.violations > 0  # bound-state dominated data sloshes


def test_local_decay_ratios_plateau():
    report = run_local_decay(cfg(**{"potential.kind": "lorentzian", "weight.sigma": 1.0}))
    for name in ("outgoing", "incoming", "combined"):
        ratio = report.constants[f"{name}_over_norm"]
        sup = report.constants[f"{name}_sup_ratio"]
        assert np.isfinite(ratio) and ratio > 0
        assert sup <= ratio * (1.0 + 1e-12) + 1e-12  # running sup attained at the end
    assert report.constants["incoming_terminal_sq"] >= 0.0


def test_wave_local_decay_blackhole():
    conf = cfg(
        **{
            "potential.kind": "blackhole",
            "potential.ell": 1,
            "data.x0": 8.0,
            "data.width": 1.0,
            "data.k0": 0.0,
            "time.horizon": 12.0,
            "time.samples": 300,
        }
    )
    report = run_wave_local_decay(conf)
    assert report.passed_certificates
    assert report.constants["energy_drift"] <= 1e-10
    assert report.constants["outgoing_over_energy"] > 0
    assert report.constants["slow_weight_constant"] > 0


def test_wave_eigenmode_negative_control():
    conf = cfg(
        **{
            "potential.kind": "blackhole",
            "potential.ell": 1,
            "data.kind": "eigenmode",
            "data.mode_index": 3,
            "time.horizon": 10.0,
            "time.samples": 200,
        }
    )
    report = run_wave_local_decay(conf)
    assert any("eigenmode" in f for f in report.flags)


def test_ell_sweep_small():
    conf = cfg(
        **{
            "grid.n": 513,
            "grid.half_width": 30.0,
            "potential.kind": "lorentzian",
            "data.kind": "window",
            "data.x0": 6.0,
            "data.half": 2.0,
            "sweep.ells": [2, 4],
            "time.horizon": 12.0,
            "time.samples": 300,
        }
    )
    report = run_ell_sweep(conf)
    assert "integral_l2" in report.constants and "integral_l4" in report.constants
    assert report.constants["per_log_max"] > 0
    assert report.passed_certificates


def test_ell_sweep_rejects_data_inside_window():
    conf = cfg(
        **{
            "potential.kind": "lorentzian",
            "data.kind": "window",
            "data.x0": 0.0,
            "data.half": 2.0,
            "sweep.ells": [2],
        }
    )
    with pytest.raises(ValueError):
        run_ell_sweep(conf)


def test_ell_sweep_window_grows_with_radius():
    base = {
        "grid.n": 513,
        "grid.half_width": 30.0,
        "potential.kind": "lorentzian",
        "data.kind": "window",
        "data.x0": 8.0,
        "data.half": 1.5,
        "sweep.ells": [4],
        "time.horizon": 10.0,
        "time.samples": 250,
    }
    small = run_ell_sweep(cfg(**base))
    big = run_ell_sweep(cfg(**{**base, "sweep.r0": 4.0}))
    assert big.constants["integral_l4"] > small.constants["integral_l4"]


def test_convergence_dilation_identity_second_order():
    conf = cfg(**{"grid.n": 129, "grid.half_width": 20.0, "convergence.target": "dilation_identity"})
    report = run_convergence_study(conf)
    assert 1.6 <= report.constants["order_0"] <= 2.4


def test_convergence_certificate_margin_stable():
    conf = cfg(
        **{
            "grid.n": 129,
            "grid.half_width": 20.0,
            "potential.kind": "lorentzian",
            "convergence.target": "certificate",
        }
    )
    report = run_convergence_study(conf)
    assert report.constants["relative_spread_finest"] < 1e-2


def test_reports_serialize_deterministically():
    conf = cfg(**{"time.samples": 50})
    rep1 = run_monotonic_decay(conf)
    rep2 = run_monotonic_decay(conf)
    assert rep1.series_csv() == rep2.series_csv()
    assert rep1.summary_text() == rep2.summary_text()
    header = rep1.series_csv().splitlines()[0]
    assert header.startswith("# proplab") and conf.hash() in header


def test_csv_roundtrips_doubles():
    conf = cfg(**{"time.samples": 20})
    rep = run_monotonic_decay(conf)
    lines = rep.series_csv().splitlines()
    names = lines[1].split(",")
    first = lines[2].split(",")
    col = names.index("incoming_mass")
    assert float(first[col]) == rep.series["incoming_mass"][0]


def test_window_data_validates():
    g = make_grid(64, 10.0)
    v = window_data(g, 5.0, 2.0)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        window_data(g, 50.0, 1.0)


def test_scaling_covariance_of_quadratic_series():
    # phases leave every tracked functional unchanged
    conf = cfg(**{"time.samples": 30})
    g = make_grid(257, 30.0)
    psi = gaussian_data(g, 8.0, 1.0, -2.0)
    from proplab.evolve import expectation, SchrodingerState
    from proplab.operators import dilation_op, tanh_observable

    b = tanh_observable(dilation_op(g), 4.0)
    s1 = expectation(SchrodingerState(psi=psi, t=0.0), b)
    s2 = expectation(SchrodingerState(psi=np.exp(0.7j) * psi, t=0.0), b)
    assert abs(s1 - s2) < 1e-13
    s4 = expectation(SchrodingerState(psi=2.0 * psi, t=0.0), b)
    assert abs(s4 - 4.0 * s1) < 1e-12
