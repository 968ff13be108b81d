"""Flat key-value scenario configuration with a typed schema.

The on-disk format is one ``key = value`` pair per line (# comments allowed),
with a mandatory ``schema_version`` field.  Unknown keys are errors: silent
typos must not change an experiment.  Identical configs produce byte-identical
outputs regardless of worker count, so everything that influences results is
part of this record.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

__all__ = ["ScenarioConfig", "parse_config", "SCHEMA_VERSION"]

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = ""
    grid_n: int = 256
    grid_s: float = 4.0
    ellipticity_k: float = 2.0
    alpha: float = 0.5
    gamma0: float = 0.2
    k_lattice: str = "2,4,8,16,32"
    seed: int = 1
    mesh_h: float = 0.02
    n_boundary: int = 16
    out_dir: str = "out"
    workers: int = 1

    def k_values(self) -> list:
        return [complex(float(tok), 0.0) for tok in self.k_lattice.split(",") if tok.strip()]

    def validate(self) -> "ScenarioConfig":
        if self.grid_n < 8 or (self.grid_n & (self.grid_n - 1)) != 0:
            raise ValueError("grid_n must be a power of two >= 8")
        if self.grid_s < 2:
            raise ValueError("grid_s must be >= 2")
        if not (self.ellipticity_k > 1):
            raise ValueError("ellipticity_k must exceed 1")
        if not (0 < self.alpha < 1):
            raise ValueError("alpha must lie in (0, 1)")
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        if self.mesh_h <= 0 or self.mesh_h >= 1:
            raise ValueError("mesh_h must lie in (0, 1)")
        if not (1 <= self.n_boundary <= 64):
            raise ValueError("n_boundary must lie in [1, 64]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        return self

    def to_text(self) -> str:
        lines = [f"schema_version = {SCHEMA_VERSION}"]
        for key, val in asdict(self).items():
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {
    "scenario": str,
    "grid_n": int,
    "grid_s": float,
    "ellipticity_k": float,
    "alpha": float,
    "gamma0": float,
    "k_lattice": str,
    "seed": int,
    "mesh_h": float,
    "n_boundary": int,
    "out_dir": str,
    "workers": int,
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a flat key-value config; unknown keys are errors."""
    values = {}
    version = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key == "schema_version":
            version = val
            continue
        if key not in _FIELD_TYPES:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _FIELD_TYPES[key](val)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {val!r}") from exc
    if version is None:
        raise ValueError("missing schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r} (want {SCHEMA_VERSION!r})")
    return ScenarioConfig(**values).validate()
