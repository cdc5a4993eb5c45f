"""Run configuration: JSON schema, defaults and the validated RunConfig."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

FORMAT_VERSION = 1

SUITE_IDS = (
    "adjoint",
    "ccr",
    "classify",
    "gateaux",
    "hermiticity",
    "kg",
    "leibniz",
    "locality",
    "phi4-oracle",
    "spectrum",
    "translation",
    "wick-compare",
)

_POS = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "genfield run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["format_version", "grid", "n_max", "profile"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["d", "K", "L", "m"],
            "properties": {
                "d": {"enum": [1, 3]},
                "K": {"type": "integer", "minimum": 1, "not": {"multipleOf": 2}},
                "L": _POS,
                "m": _POS,
            },
        },
        "n_max": {"type": "integer", "minimum": 2, "maximum": 10},
        "profile": {"enum": ["standard", "paper-literal"]},
        "eps_schedule": {
            "type": "object",
            "additionalProperties": False,
            "required": ["start", "ratio", "count"],
            "properties": {
                "start": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "ratio": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "count": {"type": "integer", "minimum": 4, "maximum": 40},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"matrix_abs": _POS, "slope_abs": _POS},
        },
        "suites": {
            "type": "array",
            "items": {"enum": list(SUITE_IDS)},
            "uniqueItems": True,
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**63 - 1},
        "oracle_expr": {"type": "array", "items": {"type": "string"}},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "report": {"type": "string"},
                "csv": {"type": ["string", "null"]},
            },
        },
    },
}


class ConfigError(ValueError):
    """Raised for anything that fails the schema gate."""


@dataclass(frozen=True)
class GridConfig:
    d: int = 1
    K: int = 3
    L: float = 2 * math.pi
    m: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    n_max: int = 4
    profile: str = "standard"
    eps_start: float = 0.1
    eps_ratio: float = 0.5
    eps_count: int = 6
    matrix_abs: float = 1e-10
    slope_abs: float = 0.1
    suites: tuple = SUITE_IDS
    seed: int = 0
    oracle_expr: tuple = ()
    report_path: str | None = None
    csv_path: str | None = None

    def echo(self) -> dict:
        """Resolved settings that determine the report payload (output paths excluded)."""
        return {
            "format_version": FORMAT_VERSION,
            "grid": asdict(self.grid),
            "n_max": self.n_max,
            "profile": self.profile,
            "eps_schedule": {"start": self.eps_start, "ratio": self.eps_ratio, "count": self.eps_count},
            "tolerances": {"matrix_abs": self.matrix_abs, "slope_abs": self.slope_abs},
            "suites": list(self.suites),
            "seed": self.seed,
            "oracle_expr": list(self.oracle_expr),
        }


def validate(raw) -> None:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None


def from_dict(raw: dict) -> RunConfig:
    validate(raw)
    from .wick import ParseError, parse

    for k, text in enumerate(raw.get("oracle_expr", [])):
        try:
            parse(text)
        except ParseError as exc:
            raise ConfigError(f"config invalid at oracle_expr/{k}: {exc}") from None
    g = raw["grid"]
    eps = raw.get("eps_schedule", {})
    tol = raw.get("tolerances", {})
    out = raw.get("output", {})
    defaults = RunConfig()
    return RunConfig(
        grid=GridConfig(int(g["d"]), int(g["K"]), float(g["L"]), float(g["m"])),
        n_max=int(raw["n_max"]),
        profile=raw["profile"],
        eps_start=float(eps.get("start", defaults.eps_start)),
        eps_ratio=float(eps.get("ratio", defaults.eps_ratio)),
        eps_count=int(eps.get("count", defaults.eps_count)),
        matrix_abs=float(tol.get("matrix_abs", defaults.matrix_abs)),
        slope_abs=float(tol.get("slope_abs", defaults.slope_abs)),
        suites=tuple(sorted(raw.get("suites", SUITE_IDS))),
        seed=int(raw.get("seed", 0)),
        oracle_expr=tuple(raw.get("oracle_expr", [])),
        report_path=out.get("report"),
        csv_path=out.get("csv"),
    )


def load(path: str | Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return from_dict(raw)
