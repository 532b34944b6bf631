"""Run configuration: flat ``key = value`` files overridable from the command line."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from iesl.solvers.dynamics import KINDS, RD_VALUES

WORKERS_ENV = "IESL_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    game: str = "kuhn-2"
    solver: str = "iesl"
    eps: float = 0.05
    step: float = 0.1
    iterations: int = 1000
    eval_every: int = 0  # 0 means max(1, iterations // 500)
    seed: int = 0
    init: str = "zero"
    rd_values: str = "counterfactual"
    window: int = 100
    threshold: float = 0.0  # 0 means 1e-3 times the game's payoff spread
    out_dir: str = "runs"
    tag: str = ""

    @property
    def effective_eval_every(self) -> int:
        return self.eval_every if self.eval_every > 0 else max(1, self.iterations // 500)

    @property
    def run_name(self) -> str:
        if self.tag:
            return self.tag
        if self.solver in ("iesl", "rd"):
            return f"{self.game}_{self.solver}_eps{self.eps:g}_step{self.step:g}"
        return f"{self.game}_{self.solver}"

    def validate(self) -> list[str]:
        errors = []
        if self.solver not in KINDS:
            errors.append(f"solver must be one of {KINDS}, got {self.solver!r}")
        if self.iterations < 0:
            errors.append("iterations must be nonnegative")
        if self.eval_every < 0:
            errors.append("eval_every must be nonnegative")
        if self.solver in ("iesl", "rd") and not self.eps > 0:
            errors.append("eps must be positive")
        if self.solver == "iesl" and not 0 < self.step <= 1:
            errors.append("IESL step must lie in (0, 1]")
        if self.solver == "rd" and not self.step > 0:
            errors.append("RD step must be positive")
        if self.init not in ("zero", "random"):
            errors.append("init must be 'zero' or 'random'")
        if self.rd_values not in RD_VALUES:
            errors.append(f"rd_values must be one of {RD_VALUES}")
        if self.window <= 0:
            errors.append("window must be positive")
        if self.threshold < 0:
            errors.append("threshold must be nonnegative")
        return errors

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str}


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        out[key] = value
    return out


def make_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge file values and overrides (overrides win); unknown keys are an error."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    kwargs = {}
    for key, value in merged.items():
        if key not in _TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        cast = _CASTS[_TYPES[key]]
        try:
            kwargs[key] = cast(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: cannot parse {value!r} as {_TYPES[key]}") from exc
    cfg = RunConfig(**kwargs)
    errors = cfg.validate()
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    return make_config(values, overrides)


def worker_slots() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1
