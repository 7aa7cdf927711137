"""Run configuration: built-in defaults < key = value file < command-line flags."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .constants import ALPHA

ENV_VAR = "UNITARY_DIRAC_CONFIG"
MASS_UNITS = ("electron_mass", "eV")
OUTPUTS = ("csv", "json")

DEFAULT_TOLERANCES = {
    "theta_min": 1e-3,
    "radial_defect": 1e-6,
    "bisect": 1e-12,
    "stability": 0.1,
}


class ConfigError(ValueError):
    """Malformed configuration (treated as a usage error)."""


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {no}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {no}: empty key")
        out[key] = value
    return out


def load_config_file(path=None) -> dict[str, str]:
    """Read the file named by ``path`` or by the environment variable; {} when neither is set."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if not path:
        return {}
    p = Path(path)
    try:
        return parse_config_text(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None


def _as_float(key: str, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


@dataclass
class RunConfig:
    alpha: float = ALPHA
    mass_unit: str = "electron_mass"
    output: str = "csv"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    params: dict = field(default_factory=dict)

    @classmethod
    def resolve(cls, file_values: dict | None = None, flags: dict | None = None) -> "RunConfig":
        merged: dict = {}
        merged.update(file_values or {})
        merged.update({k: v for k, v in (flags or {}).items() if v is not None})
        cfg = cls()
        for key, value in merged.items():
            if key == "alpha":
                cfg.alpha = _as_float(key, value)
                if cfg.alpha <= 0:
                    raise ConfigError("alpha must be positive")
            elif key == "mass_unit":
                if value not in MASS_UNITS:
                    raise ConfigError(f"mass_unit must be one of {MASS_UNITS}")
                cfg.mass_unit = value
            elif key == "output":
                if value not in OUTPUTS:
                    raise ConfigError(f"output must be one of {OUTPUTS}")
                cfg.output = value
            elif key.startswith("tol."):
                name = key[4:]
                if name not in DEFAULT_TOLERANCES:
                    raise ConfigError(f"unknown tolerance {name!r}")
                cfg.tolerances[name] = _as_float(key, value)
            else:
                cfg.params[key] = value
        return cfg

    def param(self, key: str, default=None):
        return self.params.get(key, default)

    def header(self, version: str) -> str:
        tols = ",".join(f"{k}={v:.6g}" for k, v in sorted(self.tolerances.items()))
        return (f"# unitary-dirac {version} alpha={self.alpha:.12g} "
                f"units={self.mass_unit} tolerances={tols}")
