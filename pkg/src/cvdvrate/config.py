"""YAML config files and command-line overrides for :class:`ComparisonConfig`."""

from __future__ import annotations

import argparse
import dataclasses
from pathlib import Path

import yaml

from .compare import ComparisonConfig, InfeasibleConfig

FIELDS = {f.name: f for f in dataclasses.fields(ComparisonConfig)}


def _grid(text):
    """``0.6:1.0:0.01`` (inclusive range) or a comma separated list."""
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    text = str(text)
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        n = int(round((hi - lo) / step))
        return tuple(round(lo + k * step, 10) for k in range(n + 1))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _f_required(v):
    return "auto" if str(v).strip().lower() == "auto" else float(v)


def _opt(kind):
    def parse(v):
        if v is None or str(v).strip().lower() in ("none", "null", ""):
            return None
        return kind(v)
    return parse


PARSERS = {
    "chi": float, "total_length_km": float, "f_initial_grid": _grid,
    "f_required": _f_required, "eof_target": _opt(float),
    "attenuation_db_per_km": float, "light_speed_km_per_s": float,
    "bsm_success_prob": float, "purification_formula": str,
    "num_modes": _opt(int), "cutoff": _opt(int), "nla_cutoff": _opt(int),
    "teleport_gain": _opt(float), "gain_scan_points": int, "seed": int,
    "mc_trials": int, "workers": int,
}
assert set(PARSERS) == set(FIELDS)


def load_mapping(path) -> dict:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise InfeasibleConfig(f"{path}: expected a mapping of key: value pairs")
    unknown = set(data) - set(FIELDS)
    if unknown:
        raise InfeasibleConfig(f"{path}: unknown keys {sorted(unknown)}")
    return data


def build_config(mapping: dict | None = None, **overrides) -> ComparisonConfig:
    merged = dict(mapping or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    kwargs = {}
    for key, value in merged.items():
        try:
            kwargs[key] = PARSERS[key](value)
        except (TypeError, ValueError) as exc:
            raise InfeasibleConfig(f"bad value for {key}: {value!r} ({exc})") from None
    try:
        return ComparisonConfig(**kwargs)
    except InfeasibleConfig:
        raise
    except ValueError as exc:
        raise InfeasibleConfig(str(exc)) from None


def add_override_flags(parser: argparse.ArgumentParser) -> None:
    """One flag per config key, spelled with underscores or dashes."""
    for name in FIELDS:
        flags = [f"--{name}"]
        if "_" in name:
            flags.append(f"--{name.replace('_', '-')}")
        parser.add_argument(*flags, dest=name, default=None, metavar="VALUE")


def config_from_args(args) -> ComparisonConfig:
    mapping = load_mapping(args.config) if getattr(args, "config", None) else {}
    return build_config(mapping, **{k: getattr(args, k) for k in FIELDS})
