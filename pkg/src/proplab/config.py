"""Line-oriented key=value configuration with dotted namespaces.

Files hold one `key = value` pair per line, '#' comments, blank lines allowed.
Unknown keys are rejected by exact name; `--set key=value` overrides supersede
file values; every run echoes the fully resolved configuration (and its hash)
into a manifest.
"""

from __future__ import annotations

import math
from pathlib import Path

from .experiments import ExperimentConfig
from .operators import POSITIVITY_THRESHOLD

_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _as_bool(s):
    if isinstance(s, bool):
        return s
    try:
        return _BOOL[str(s).strip().lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {s!r}")


def _as_int_list(s):
    if isinstance(s, (list, tuple)):
        return [int(v) for v in s]
    return [int(p) for p in str(s).split(",") if p.strip()]


# key -> (type converter, default); None default means "required when used"
SCHEMA = {
    "grid.n": (int, 512),
    "grid.half_width": (float, 40.0),
    "potential.kind": (str, "none"),
    "potential.c0": (float, 1.0),
    "potential.b": (float, 1.0),
    "potential.amplitude": (float, 1.0),
    "potential.rate": (float, 1.0),
    "potential.tail_amplitude": (float, 0.05),
    "potential.tail_rate": (float, 1.0),
    "potential.mass": (float, 1.0),
    "potential.ell": (int, 0),
    "potential.centered": (_as_bool, True),
    "potential.csv": (str, ""),
    "observable.R": (float, 4.0),
    "observable.M": (float, 3.0),
    "observable.eps": (float, 0.1),
    "observable.allow_subcritical": (_as_bool, False),
    "weight.b": (float, 1.0),
    "weight.sigma": (float, 1.0),
    "weight.eps": (float, 0.5),
    "weight.delta": (float, 0.25),
    "data.kind": (str, "gaussian"),
    "data.x0": (float, 10.0),
    "data.width": (float, 1.0),
    "data.k0": (float, -2.0),
    "data.half": (float, 2.0),
    "data.mode_index": (int, 0),
    "time.horizon": (float, 0.0),
    "time.samples": (int, 2000),
    "evolve.method": (str, "exact"),
    "evolve.dt": (float, 0.0),
    "experiment.kind": (str, "monotonic_decay"),
    "sweep.ells": (_as_int_list, [2, 4, 8, 16, 32]),
    "sweep.r0": (float, 2.0),
    "sweep.beta0": (float, 0.1),
    "sweep.slack": (float, 2.0),
    "certify.bulk_fraction": (float, 0.8),
    "certify.kcut": (float, 4.0),
    "certify.beta": (float, 0.0),
    "certify.targets": (str, "commutator,repulsive"),
    "convergence.levels": (int, 3),
    "convergence.target": (str, "potential_commutator"),
    "seed": (int, 0),
}

_VALID_CHOICES = {
    "potential.kind": {"none", "lorentzian", "exponential_tail", "lorentzian_plus_tail", "blackhole", "stieltjes_csv"},
    "data.kind": {"gaussian", "window", "eigenmode"},
    "evolve.method": {"exact", "cn"},
    "experiment.kind": {"monotonic_decay", "local_decay", "wave_local_decay", "ell_sweep", "convergence"},
    "convergence.target": {"potential_commutator", "dilation_identity", "certificate", "monotonicity"},
}


class ConfigError(ValueError):
    pass


def _parse_lines(text: str, source: str) -> dict:
    out = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_config(path, overrides=()) -> ExperimentConfig:
    """Read, override, validate, and default a configuration file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    raw = _parse_lines(path.read_text(encoding="utf-8"), str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()

    values = {}
    for key, text in raw.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown configuration key '{key}'")
        conv, _ = SCHEMA[key]
        try:
            values[key] = conv(text)
        except (ValueError, TypeError):
            raise ConfigError(f"key '{key}' expects {getattr(conv, '__name__', 'value')}, got {text!r}")
    for key, (_, default) in SCHEMA.items():
        values.setdefault(key, default)

    for key, choices in _VALID_CHOICES.items():
        if values[key] not in choices:
            raise ConfigError(f"key '{key}' must be one of {sorted(choices)}, got {values[key]!r}")
    if values["grid.n"] < 16:
        raise ConfigError(f"grid.n must be >= 16, got {values['grid.n']}")
    if values["grid.half_width"] <= 0 or not math.isfinite(values["grid.half_width"]):
        raise ConfigError(f"grid.half_width must be finite and positive, got {values['grid.half_width']}")
    if values["observable.R"] <= POSITIVITY_THRESHOLD and not values["observable.allow_subcritical"]:
        raise ConfigError(
            f"observable.R = {values['observable.R']} is at or below the positivity threshold "
            f"2/pi ~ {POSITIVITY_THRESHOLD:.4f}; set observable.allow_subcritical=true to proceed"
        )
    if values["potential.kind"] == "stieltjes_csv" and not values["potential.csv"]:
        raise ConfigError("potential.kind=stieltjes_csv requires potential.csv=<path>")
    return ExperimentConfig(values=values)


def manifest_text(cfg: ExperimentConfig, version: str, extra=()) -> str:
    lines = [f"# proplab {version} run manifest", f"config_hash={cfg.hash()}"]
    for k in sorted(cfg.values):
        v = cfg.values[k]
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        lines.append(f"{k}={v}")
    lines.extend(extra)
    return "\n".join(lines) + "\n"
