"""Run configuration: TOML files, or the ``config`` block of a results.json."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigurationError
from .evaluation import grid_expand, method_axes, resolve_grids
from .models import METHODS
from .subspace import HyperParams

KNOWN_KEYS = {
    "method", "kernel", "target", "label_column", "inputs", "seed", "k_outer", "k_inner",
    "standardize", "max_iters", "split_strategies", "jobs", "out", "grid",
}


@dataclass(frozen=True)
class RunConfig:
    method: str
    inputs: tuple[str, ...]
    target: str = "MI"
    kernel: str = "linear"
    label_column: str = "label"
    seed: int = 0
    k_outer: int = 5
    k_inner: int = 10
    standardize: bool = False
    max_iters: int = 100
    split_strategies: bool = True
    jobs: int = 1
    out: str | None = None
    grid: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}; choose from {METHODS}")
        method_axes(self.method, self.kernel)
        if not self.inputs:
            raise ConfigurationError("config needs at least one input file")
        if self.method == "ms_svdd" and len(self.inputs) < 2:
            raise ConfigurationError("ms_svdd requires >= 2 views (one input file per view)")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.k_outer < 2 or self.k_inner < 2:
            raise ConfigurationError("fold counts must be >= 2")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be >= 1")
        object.__setattr__(self, "grid", resolve_grids(self.method, self.kernel, self.grid))

    def hyperparams(self) -> list[HyperParams]:
        return grid_expand(self.method, self.kernel, self.grid, self.max_iters)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "kernel": self.kernel,
            "target": self.target,
            "label_column": self.label_column,
            "inputs": list(self.inputs),
            "seed": self.seed,
            "k_outer": self.k_outer,
            "k_inner": self.k_inner,
            "standardize": self.standardize,
            "max_iters": self.max_iters,
            "split_strategies": self.split_strategies,
            "grid": self.grid,
        }

    @classmethod
    def from_mapping(cls, doc: dict, base_dir: Path | None = None) -> "RunConfig":
        unknown = set(doc) - KNOWN_KEYS
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        if "method" not in doc:
            raise ConfigurationError("config must set 'method'")
        inputs = doc.get("inputs") or []
        if isinstance(inputs, str):
            inputs = [inputs]
        base = base_dir or Path.cwd()
        resolved = []
        for p in inputs:
            path = Path(p)
            if not path.is_absolute():
                path = (base / path).resolve()
            resolved.append(str(path))
        kwargs = {k: v for k, v in doc.items() if k not in ("inputs", "grid")}
        try:
            return cls(inputs=tuple(resolved), grid=dict(doc.get("grid") or {}), **kwargs)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    """TOML config, or a results.json (its embedded ``config`` block is used)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix == ".json":
            doc = json.loads(text)
            if "config" in doc:
                doc = doc["config"]
        else:
            doc = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from None
    return RunConfig.from_mapping(doc, path.parent.resolve())
