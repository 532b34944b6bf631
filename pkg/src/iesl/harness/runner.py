"""Run orchestration: one solver on one game, streaming evaluation records to CSV."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from iesl.analysis.convergence import detect_convergence, iterations_to_threshold
from iesl.evaluator import deviation_check, nashconv
from iesl.game.build import game_by_name
from iesl.game.tree import GameTree
from iesl.harness.config import RunConfig
from iesl.harness.svg import write_chart
from iesl.solvers import checkpoint
from iesl.solvers.dynamics import SolverState, evaluation_policy, init_state, rest_residual, step

CSV_NAME = "records.csv"
SUMMARY_NAME = "summary.json"
CHECKPOINT_NAME = "checkpoint.json"
CHART_NAME = "curve.svg"
CONFIG_NAME = "config.txt"


@dataclass
class RunRecord:
    iteration: int
    nashconv: float
    exploitability: list[float]
    residual: float
    drift: float
    ms: float

    def row(self) -> list[str]:
        return [str(self.iteration), fmt(self.nashconv), *map(fmt, self.exploitability), fmt(self.residual), fmt(self.drift), fmt(self.ms)]


@dataclass
class RunOutcome:
    config: RunConfig
    records: list[RunRecord]
    residuals: np.ndarray  # one per executed step
    state: SolverState
    summary: dict
    out_dir: Path
    interrupted: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def final_nashconv(self) -> float:
        return self.records[-1].nashconv if self.records else math.nan


def fmt(x: float) -> str:
    """Locale-independent decimal with 12 significant digits."""
    return format(float(x), ".12g")


def csv_header(num_players: int) -> list[str]:
    return ["iter", "nashconv", *[f"expl_p{i + 1}" for i in range(num_players)], "residual", "drift", "ms"]


def default_threshold(tree: GameTree) -> float:
    return 1e-3 * tree.payoff_spread


def eval_schedule(start: int, iterations: int, every: int) -> set[int]:
    stop = start + iterations
    return {start, stop, *range(start + every, stop, every)}


def run_solve(
    config: RunConfig,
    tree: GameTree | None = None,
    resume: SolverState | None = None,
    out_dir: str | Path | None = None,
    write_files: bool = True,
) -> RunOutcome:
    """Run ``config.iterations`` steps (on top of ``resume`` if given) and write the run's files.

    A KeyboardInterrupt stops the loop early; the checkpoint and summary are
    still written and the CSV holds every record emitted so far.
    """
    tree = tree if tree is not None else game_by_name(config.game)
    if resume is not None:
        if resume.kind != config.solver:
            raise ValueError(f"checkpoint holds a {resume.kind} state, config asks for {config.solver}")
        state = resume
    else:
        extra = {"values": config.rd_values} if config.solver == "rd" else {}
        state = init_state(tree, config.solver, eps=config.eps, step=config.step, init=config.init, seed=config.seed, **extra)
    out = Path(out_dir) if out_dir is not None else Path(config.out_dir) / config.run_name
    if write_files:
        out.mkdir(parents=True, exist_ok=True)
        (out / CONFIG_NAME).write_text(config.to_text())

    start = state.k
    schedule = eval_schedule(start, config.iterations, config.effective_eval_every)
    residuals = np.full(config.iterations, np.nan)
    records: list[RunRecord] = []
    previous_policy = None
    interrupted = False
    t0 = time.perf_counter()

    handle = open(out / CSV_NAME, "w", newline="") if write_files else None
    writer = csv.writer(handle, lineterminator="\n") if handle else None
    if writer:
        writer.writerow(csv_header(tree.num_players))

    def record() -> None:
        nonlocal previous_policy
        policy = evaluation_policy(state, tree)
        result = nashconv(tree, policy)
        drift = math.nan if previous_policy is None else float(np.max(np.abs(policy - previous_policy), initial=0.0))
        previous_policy = policy
        residual = rest_residual(state, tree) if state.k == start else state.last_residual
        rec = RunRecord(state.k, result.nashconv, result.exploitability.tolist(), residual, drift, (time.perf_counter() - t0) * 1e3)
        records.append(rec)
        if writer:
            writer.writerow(rec.row())
            handle.flush()

    try:
        record()
        for i in range(config.iterations):
            step(state, tree)
            residuals[i] = state.last_residual
            if state.k in schedule:
                record()
    except KeyboardInterrupt:
        interrupted = True
    finally:
        if handle:
            handle.close()

    executed = state.k - start
    residuals = residuals[:executed]
    summary = summarize(config, tree, state, records, residuals, interrupted)
    if write_files:
        checkpoint.save(out / CHECKPOINT_NAME, state, config.game)
        (out / SUMMARY_NAME).write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
        write_chart(
            out / CHART_NAME,
            {config.solver: ([r.iteration for r in records], [r.nashconv for r in records])},
            title=f"{config.game} {config.run_name}",
        )
    return RunOutcome(config, records, residuals, state, summary, out, interrupted)


def convergence_summary(config: RunConfig, tree: GameTree, residuals: np.ndarray, records: list[RunRecord]) -> dict:
    threshold = config.threshold if config.threshold > 0 else default_threshold(tree)
    doc = {"window": config.window, "threshold": threshold, "converged": None, "iterations_to_threshold": None}
    if config.solver != "iesl" or len(residuals) < config.window:
        return doc
    drifts = [r.drift for r in records[1:]]
    verdict = detect_convergence(residuals, window=config.window, threshold=threshold, drifts=drifts)
    doc["converged"] = verdict.converged
    doc["trailing_max_residual"] = verdict.trailing_max
    doc["iterations_to_threshold"] = iterations_to_threshold(residuals, threshold)
    return doc


def summarize(config, tree, state, records, residuals, interrupted) -> dict:
    final = records[-1] if records else None
    summary = {
        "game": config.game,
        "solver": config.solver,
        "params": state.params,
        "iterations": int(state.k),
        "interrupted": interrupted,
        "final_nashconv": final.nashconv if final else None,
        "final_exploitability": final.exploitability if final else None,
        "max_abs_score": float(np.max(np.abs(state.tables["y"]), initial=0.0)) if "y" in state.tables else None,
        "convergence": convergence_summary(config, tree, residuals, records),
        "deviation": None,
    }
    if config.solver == "iesl" and final is not None:
        report = deviation_check(tree, evaluation_policy(state, tree), state.params["eps"])
        dev = asdict(report)
        dev["exploitability"] = report.exploitability.tolist()
        dev["satisfied"] = report.satisfied
        summary["deviation"] = dev
    return summary


def read_records(path: str | Path) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [dict(zip(header, map(float, row))) for row in reader]
    return header, rows
