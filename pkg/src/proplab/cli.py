"""Command-line entry point.

Subcommands: certify, evolve, experiment, sweep, converge.  Every run writes
manifest.txt echoing the fully resolved configuration plus content hashes of
the produced artifacts; outputs are written atomically (temp file + rename).
Exit status: 0 all declared checks passed, 1 a check failed (reports still
written), 2 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, certify, experiments, potentials
from .config import ConfigError, manifest_text, parse_config
from .experiments import ExperimentConfig, FLOAT_FORMAT
from .operators import make_grid


def _atomic_write(path: Path, text: str) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        "w", dir=path.parent, prefix=path.name + ".", suffix=".tmp", delete=False, encoding="utf-8"
    ) as fh:
        fh.write(text)
        tmp = Path(fh.name)
    tmp.replace(path)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _certificates_csv(certs, cfg) -> str:
    rows = certify.certificates_to_csv_rows(certs)
    keys = ["name", "n", "h", "lambda_min", "required_bound", "margin", "tol", "kind", "passed"]
    lines = [f"# proplab {__version__} config_hash={cfg.hash()}"]
    lines.append(",".join(keys))
    for r in rows:
        cells = []
        for k in keys:
            v = r.get(k, "")
            cells.append(FLOAT_FORMAT % v if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _run_certify(cfg: ExperimentConfig, out: Path) -> int:
    grid = make_grid(int(cfg["grid.n"]), float(cfg["grid.half_width"]))
    spec = experiments.build_potential(cfg)
    r_scale = float(cfg["observable.R"])
    targets = [t.strip() for t in str(cfg["certify.targets"]).split(",") if t.strip()]
    certs = []
    for target in targets:
        if target == "commutator":
            direct = certify.commutator(
                experiments._hamiltonian(grid, spec)[0],
                certify.tanh_observable(certify.dilation_op(grid), r_scale),
            )
            certs.append(
                certify.min_eig_certificate(
                    direct,
                    bulk_fraction=float(cfg["certify.bulk_fraction"]),
                    k_cut=float(cfg["certify.kcut"]),
                    name=f"tanh-commutator(R={r_scale:g})",
                )
            )
        elif target == "repulsive":
            if spec is None:
                continue
            beta = float(cfg["certify.beta"]) or 1.0 / r_scale
            certs.append(certify.check_analytic_repulsive(spec, beta, grid))
        elif target == "uncertainty":
            certs.append(certify.uncertainty_weighted(grid, float(cfg["weight.b"]), float(cfg["weight.sigma"])))
            certs.append(certify.uncertainty_interval(grid, 1.0, (-1.0, 1.0)))
            certs.append(certify.kernel_domination_certificate(grid, max(r_scale, 8.0)))
        else:
            raise ConfigError(f"unknown certify target '{target}'")
    csv_hash = _atomic_write(out / "certificates.csv", _certificates_csv(certs, cfg))
    summary = "\n".join(
        f"{c.name}: {'pass' if c.passed else 'FAIL'} lambda_min={FLOAT_FORMAT % c.lambda_min} "
        f"margin={FLOAT_FORMAT % c.margin}"
        for c in certs
    )
    _atomic_write(out / "summary.txt", summary + "\n")
    _atomic_write(out / "manifest.txt", manifest_text(cfg, __version__, [f"sha256.certificates.csv={csv_hash}"]))
    return 0 if all(c.passed for c in certs) else 1


_RUNNERS = {
    "monotonic_decay": experiments.run_monotonic_decay,
    "local_decay": experiments.run_local_decay,
    "wave_local_decay": experiments.run_wave_local_decay,
    "ell_sweep": experiments.run_ell_sweep,
    "convergence": experiments.run_convergence_study,
}


def _write_report(report, cfg, out: Path) -> int:
    extra = []
    if report.times is not None:
        extra.append(f"sha256.series.csv={_atomic_write(out / 'series.csv', report.series_csv())}")
    if report.certificates:
        extra.append(
            f"sha256.certificates.csv={_atomic_write(out / 'certificates.csv', _certificates_csv(report.certificates, cfg))}"
        )
    extra.append(f"sha256.summary.txt={_atomic_write(out / 'summary.txt', report.summary_text())}")
    _atomic_write(out / "manifest.txt", manifest_text(cfg, __version__, extra))
    failed = (
        not report.passed_certificates
        or "log-bound-verdict-failed" in report.flags
        or "hypothesis-violated" in report.flags
        or report.violations > 0
    )
    return 1 if failed else 0


def _run_experiment(cfg: ExperimentConfig, out: Path, kind: str | None = None) -> int:
    kind = kind or str(cfg["experiment.kind"])
    runner = _RUNNERS.get(kind)
    if runner is None:
        raise ConfigError(f"unknown experiment kind '{kind}'")
    return _write_report(runner(cfg), cfg, out)


def _run_evolve(cfg: ExperimentConfig, out: Path) -> int:
    # thin wrapper: monotonic run doubles as the generic evolution trace
    return _write_report(experiments.run_monotonic_decay(cfg), cfg, out)


def _run_sweep(cfg: ExperimentConfig, out: Path, jobs: int) -> int:
    ells = [int(e) for e in cfg["sweep.ells"]]
    if jobs > 1:
        # run scales concurrently as single-scale reports, then merge by key
        def one(ell):
            sub = ExperimentConfig(values={**cfg.values, "sweep.ells": [ell]})
            return ell, experiments.run_ell_sweep(sub)

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            partials = dict(pool.map(one, ells))
        merged = experiments.DecayReport(kind="ell_sweep", config_hash=cfg.hash())
        merged.times = partials[ells[0]].times
        for ell in sorted(partials):
            rep = partials[ell]
            merged.series.update(rep.series)
            merged.certificates.extend(rep.certificates)
            for k, v in rep.constants.items():
                if k.endswith(f"_l{ell}"):
                    merged.constants[k] = v
            merged.flags.extend(f for f in rep.flags if f"ell={ell}" in f)
        ratios = np.array([merged.constants[f"per_log_l{e}"] for e in sorted(partials) if f"per_log_l{e}" in merged.constants])
        if len(ratios):
            merged.constants["per_log_max"] = float(ratios.max())
            merged.constants["per_log_median"] = float(np.median(ratios))
            merged.constants["max_over_median"] = float(ratios.max() / np.median(ratios))
            if ratios.max() > float(cfg["sweep.slack"]) * np.median(ratios):
                merged.flags.append("log-bound-verdict-failed")
        return _write_report(merged, cfg, out)
    return _write_report(experiments.run_ell_sweep(cfg), cfg, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="proplab",
        description="Positive-commutator certificates and monotonic decay experiments on a 1-D lattice.",
    )
    parser.add_argument("command", choices=["certify", "evolve", "experiment", "sweep", "converge"])
    parser.add_argument("--config", required=True, help="key=value configuration file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep members")
    parser.add_argument("--grid-levels", type=int, default=0, help="refinement levels for converge")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config, args.set)
        out = Path(args.out)
        if args.command == "certify":
            return _run_certify(cfg, out)
        if args.command == "evolve":
            return _run_evolve(cfg, out)
        if args.command == "experiment":
            return _run_experiment(cfg, out)
        if args.command == "sweep":
            return _run_sweep(cfg, out, args.jobs)
        if args.command == "converge":
            if args.grid_levels:
                cfg = ExperimentConfig(values={**cfg.values, "convergence.levels": args.grid_levels})
            return _run_experiment(cfg, out, kind="convergence")
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, FileNotFoundError, ValueError, potentials.ContinuationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
