"""Experiment harness: configuration, run orchestration and the command-line interface."""

from iesl.harness.config import ConfigError, RunConfig, load_config, make_config
from iesl.harness.runner import RunOutcome, RunRecord, run_solve

__all__ = ["ConfigError", "RunConfig", "RunOutcome", "RunRecord", "load_config", "make_config", "run_solve"]
