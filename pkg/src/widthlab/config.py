"""Experiment configuration: flat INI files, one section per experiment.

A config file holds a single section named after the experiment kind
(for example ``[fixed-b]``) with flat key=value pairs.  Unknown keys,
missing required keys, and out-of-range values are rejected with the
offending key named in the message.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

from .errors import ConfigError

_GRID_KINDS = ("identity", "curved")


@dataclass(frozen=True)
class Field:
    kind: str            # int | float | str | floats | ints
    default: object = None
    required: bool = False


SCHEMAS = {
    "fixed-b": {
        "d": Field("int", required=True),
        "h_values": Field("floats", (0.1, 0.05, 0.025)),
        "s_minus": Field("int", 1),
        "s_plus": Field("int", 1),
        "p": Field("float", 2.0),
        "map": Field("str", "identity"),
        "curvature": Field("float", 0.0),
        "rate_window": Field("float", 0.15),
        "support_grid_points": Field("int", 200),
    },
    "variable-b": {
        "d": Field("int", required=True),
        "big_d": Field("int", 1),
        "h": Field("float", 0.1),
        "s_b": Field("int", 1),
        "s_minus": Field("int", 1),
        "s_plus": Field("int", 1),
        "cap": Field("int", 256),
        "map": Field("str", "identity"),
        "curvature": Field("float", 0.0),
    },
    "upper-bound": {
        "d": Field("int", required=True),
        "h_values": Field("floats", (0.1, 0.05, 0.025)),
        "s_minus": Field("int", 1),
        "s_plus": Field("int", 1),
        "map": Field("str", "identity"),
        "curvature": Field("float", 0.0),
        "degree": Field("int", 2),
        "min_rate": Field("float", 1.5),
    },
    "rhs-invariance": {
        "d": Field("int", required=True),
        "h": Field("float", 0.1),
        "tolerance": Field("float", 1e-10),
        "grid_points": Field("int", 21),
        "map": Field("str", "identity"),
        "curvature": Field("float", 0.0),
    },
    "convolution": {
        "d": Field("int", required=True),
        "h": Field("float", 0.1),
        "tolerance": Field("float", 1e-8),
        "grid_points": Field("int", 101),
        "trace_steps": Field("int", 1000),
    },
    "rb-elliptic": {
        "q_terms": Field("int", 1),
        "n_elements": Field("int", 512),
        "m_max": Field("int", 6),
        "n_train": Field("int", 33),
        "n_check": Field("int", 50),
        "seed": Field("int", 0),
        "consistency_tol": Field("float", 1e-12),
        "decay_ratio": Field("float", 2.0),
    },
    "svd-transport": {
        "n_x": Field("int", 4096),
        "n_mu": Field("int", 512),
        "n_values": Field("ints", (4, 8, 16, 32, 64)),
        "exponent_low": Field("float", -0.65),
        "exponent_high": Field("float", -0.35),
    },
    "riemann": {
        "mu_values": Field("floats", (-1.0, -0.5, 0.0, 0.5, 1.0)),
        "tolerance": Field("float", 1e-10),
    },
}

# Experiments whose geometry lives on the reference domain need d.
GEOMETRY_KINDS = ("fixed-b", "variable-b", "upper-bound", "rhs-invariance", "convolution")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    options: dict

    def __getitem__(self, key):
        return self.options[key]


def _parse_value(key, field, raw):
    raw = raw.strip()
    try:
        if field.kind == "int":
            return int(raw)
        if field.kind == "float":
            return float(raw)
        if field.kind == "floats":
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
        if field.kind == "ints":
            return tuple(int(tok) for tok in raw.replace(",", " ").split())
        return raw
    except ValueError as exc:
        raise ConfigError(f"key '{key}': cannot parse {raw!r} as {field.kind}") from exc


def _validate(kind, options):
    if kind in GEOMETRY_KINDS:
        if options["d"] < 2:
            raise ConfigError("key 'd': must be at least 2")
    if kind == "variable-b" and options["big_d"] < 1:
        raise ConfigError("key 'big_d': must be at least 1")
    for key in ("s_minus", "s_plus", "s_b"):
        if key in options and options[key] < 1:
            raise ConfigError(f"key '{key}': smoothness must be a positive integer")
    hs = options.get("h_values", ())
    if "h" in options:
        hs = hs + (options["h"],)
    for h in hs:
        if not 0.0 < h <= 0.1 + 1e-12:
            raise ConfigError(f"key 'h': scale {h} outside (0, 1/10]")
    if options.get("map") not in (None,) + _GRID_KINDS:
        raise ConfigError(f"key 'map': must be one of {_GRID_KINDS}")


def parse_config(text, kind):
    """Parse INI text for one experiment kind into a validated config."""
    if kind not in SCHEMAS:
        raise ConfigError(f"unknown experiment kind '{kind}'")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from exc
    if not parser.has_section(kind):
        raise ConfigError(f"missing section '[{kind}]'")
    schema = SCHEMAS[kind]
    options = {}
    for key, raw in parser.items(kind):
        if key not in schema:
            raise ConfigError(f"key '{key}': not recognized for '{kind}'")
        options[key] = _parse_value(key, schema[key], raw)
    for key, field in schema.items():
        if key in options:
            continue
        if field.required:
            raise ConfigError(f"key '{key}': required for '{kind}' but missing")
        options[key] = field.default
    _validate(kind, options)
    return ExperimentConfig(kind=kind, options=options)


def load_config(path, kind):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, kind)


def serialize(config):
    """Render a config back to INI text; parse(serialize(c)) == c."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.add_section(config.kind)
    for key in sorted(config.options):
        value = config.options[key]
        if isinstance(value, tuple):
            rendered = " ".join(repr(v) for v in value)
        else:
            rendered = repr(value) if not isinstance(value, str) else value
        parser.set(config.kind, key, rendered)
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()
