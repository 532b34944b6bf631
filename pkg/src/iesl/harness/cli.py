"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 verification gate failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from iesl.game.build import SYNTHETIC_GAMES, REFERENCE_COUNTS, game_by_name
from iesl.harness import profiles
from iesl.harness.config import ConfigError, RunConfig, make_config, parse_config_text, worker_slots
from iesl.harness.runner import CHART_NAME, fmt, run_solve
from iesl.harness.svg import write_chart

log = logging.getLogger("iesl")

EXIT_OK, EXIT_USAGE, EXIT_GATE = 0, 1, 2

CONFIG_FLAGS = (
    "game", "solver", "eps", "step", "iterations", "eval_every", "seed",
    "init", "rd_values", "window", "threshold", "out_dir", "tag",
)


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- helpers
def _overrides(args) -> dict:
    return {k: getattr(args, k, None) for k in CONFIG_FLAGS}


def _add_run_flags(p: argparse.ArgumentParser, with_game=True, with_solver=True) -> None:
    if with_game:
        p.add_argument("--game", help="kuhn-2, kuhn-3, leduc-2, leduc-3, matching-pennies or two-step")
    if with_solver:
        p.add_argument("--solver", choices=profiles.SOLVER_ORDER)
        p.add_argument("--eps", type=float)
    p.add_argument("--step", type=float, help="step size (lambda)")
    p.add_argument("--iterations", type=int)
    p.add_argument("--eval-every", dest="eval_every", type=int, help="0 means max(1, iterations // 500)")
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=("zero", "random"))
    p.add_argument("--rd-values", dest="rd_values", choices=("counterfactual", "normalized"))
    p.add_argument("--window", type=int)
    p.add_argument("--threshold", type=float, help="residual threshold; 0 means 1e-3 x payoff spread")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--tag")


def _profile_values(game: str | None, solver: str | None, profile: str | None, params_dir) -> dict:
    if profile is None or game is None:
        return {}
    values = dict(profiles.params_for(game, solver or "iesl", params_dir))
    values["iterations"] = profiles.budget_for(game, profile)
    return values


def _run_job(config: RunConfig) -> dict:
    """Worker entry point: returns the run summary or the error message."""
    try:
        outcome = run_solve(config)
    except Exception as exc:  # reported per cell
        return {"error": f"{type(exc).__name__}: {exc}", "run": config.run_name}
    doc = dict(outcome.summary)
    doc["run"] = config.run_name
    doc["out_dir"] = str(outcome.out_dir)
    doc["curve"] = [[r.iteration, r.nashconv] for r in outcome.records]
    return doc


def _run_many(configs: list[RunConfig]) -> list[dict]:
    workers = min(worker_slots(), max(1, len(configs)))
    if workers == 1:
        return [_run_job(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, configs))


def _dump(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _nc_cell(doc: dict) -> str:
    if "error" in doc:
        return "error"
    nc = doc.get("final_nashconv")
    return "-" if nc is None else f"{nc:.6f}"


# ----------------------------------------------------------------- commands
def cmd_solve(args) -> int:
    from iesl.solvers import checkpoint

    file_values = parse_config_text(Path(args.config).read_text()) if args.config else {}
    game = args.game or file_values.get("game")
    solver = args.solver or file_values.get("solver")
    base = _profile_values(game, solver, args.profile, args.params_dir)
    base.update(file_values)
    config = make_config(base, _overrides(args))
    resume = None
    if args.resume:
        resume, ckpt_game = checkpoint.load(args.resume)
        if ckpt_game != config.game:
            raise UsageError(f"checkpoint is for {ckpt_game}, config is for {config.game}")
    outcome = run_solve(config, resume=resume)
    s = outcome.summary
    print(f"run {config.run_name}: iterations {s['iterations']}, final NashConv {fmt(s['final_nashconv'])}")
    conv = s["convergence"]
    if conv["converged"] is not None:
        print(f"converged: {conv['converged']} (window {conv['window']}, threshold {fmt(conv['threshold'])})")
    if s["deviation"]:
        d = s["deviation"]
        print(f"deviation {fmt(d['measured_deviation'])} vs bound {fmt(d['bound'])}: {'ok' if d['satisfied'] else 'exceeded'}")
    print(f"outputs in {outcome.out_dir}")
    if outcome.interrupted:
        print("interrupted; checkpoint flushed", file=sys.stderr)
        return 130
    return EXIT_OK


def cmd_compare(args) -> int:
    solvers = args.solvers or list(profiles.SOLVER_ORDER)
    out = Path(args.out_dir)
    configs, cells = [], []
    for game in args.games:
        budget = args.budget if args.budget is not None else profiles.budget_for(game, args.profile)
        for solver in solvers:
            values = profiles.params_for(game, solver, args.params_dir)
            values.update(game=game, solver=solver, iterations=budget, out_dir=str(out / game), seed=args.seed)
            try:
                configs.append(make_config(values))
                cells.append((game, solver))
            except ConfigError as exc:
                cells.append((game, solver, str(exc)))
    results = iter(_run_many(configs))
    table: dict[str, dict[str, dict]] = {s: {} for s in solvers}
    for cell in cells:
        if len(cell) == 3:
            table[cell[1]][cell[0]] = {"error": cell[2]}
        else:
            table[cell[1]][cell[0]] = next(results)
    for game in args.games:
        series = {s: tuple(zip(*table[s][game].get("curve", []))) or ([], []) for s in solvers}
        (out / game).mkdir(parents=True, exist_ok=True)
        write_chart(out / game / CHART_NAME, series, title=f"{game}: NashConv")

    lines = ["| solver | " + " | ".join(args.games) + " |", "|---" * (len(args.games) + 1) + "|"]
    for s in solvers:
        lines.append(f"| {s} | " + " | ".join(_nc_cell(table[s][g]) for g in args.games) + " |")
    report = "\n".join(lines) + "\n"
    print(report, end="")
    for s in solvers:
        for g in args.games:
            if "error" in table[s][g]:
                print(f"{s} on {g} failed: {table[s][g]['error']}", file=sys.stderr)
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare.md").write_text(report)
    slim = {s: {g: {k: v for k, v in d.items() if k != "curve"} for g, d in row.items()} for s, row in table.items()}
    _dump(out / "compare.json", {"games": args.games, "solvers": solvers, "table": slim})
    return EXIT_OK


def sweep_summary(results: dict[float, dict]) -> dict:
    """Per-eps verdicts plus the orderings among converged runs (largest eps first)."""
    rows = []
    for eps in sorted(results, reverse=True):
        d = results[eps]
        conv = d.get("convergence", {}) if "error" not in d else {}
        rows.append({
            "eps": eps,
            "converged": bool(conv.get("converged")),
            "final_nashconv": d.get("final_nashconv"),
            "iterations_to_threshold": conv.get("iterations_to_threshold"),
            "error": d.get("error"),
        })
    conv_rows = [r for r in rows if r["converged"]]
    ncs = [r["final_nashconv"] for r in conv_rows]
    itts = [r["iterations_to_threshold"] for r in conv_rows]
    return {
        "runs": rows,
        "verdicts": {repr(r["eps"]): r["converged"] for r in rows},
        "converged_eps": [r["eps"] for r in conv_rows],
        "nashconv_nonincreasing": all(a >= b for a, b in zip(ncs, ncs[1:])),
        "iterations_nondecreasing": all(a is not None and b is not None and a <= b for a, b in zip(itts, itts[1:])),
        "by_nashconv": [r["eps"] for r in sorted(conv_rows, key=lambda r: r["final_nashconv"])],
        "by_iterations": [r["eps"] for r in sorted(conv_rows, key=lambda r: r["iterations_to_threshold"])],
    }


def cmd_sweep_eps(args) -> int:
    if not args.eps:
        raise UsageError("sweep-eps needs at least one eps")
    base = _profile_values(args.game, "iesl", args.profile, args.params_dir)
    base.pop("eps", None)
    out = Path(args.out_dir or "runs") / f"sweep_{args.game}"
    ov = _overrides(args)
    ov.update(game=args.game, solver="iesl", out_dir=str(out), eps=None)
    configs = [make_config(base, {**ov, "eps": e}) for e in args.eps]
    docs = _run_many(configs)
    summary = sweep_summary(dict(zip(args.eps, docs)))
    summary.update(game=args.game, step=configs[0].step, iterations=configs[0].iterations)
    write_chart(
        out / CHART_NAME,
        {f"eps={e:g}": tuple(zip(*d.get("curve", []))) or ([], []) for e, d in zip(args.eps, docs)},
        title=f"{args.game}: IESL NashConv by eps",
    )
    _dump(out / "sweep.json", summary)
    for r in summary["runs"]:
        verdict = "error" if r["error"] else ("converged" if r["converged"] else "not converged")
        nc = "-" if r["final_nashconv"] is None else f"{r['final_nashconv']:.6f}"
        print(f"eps {r['eps']:g}: {verdict}, final NashConv {nc}, iterations to threshold {r['iterations_to_threshold']}")
    print(f"converged, by NashConv: {summary['by_nashconv']}; by iterations: {summary['by_iterations']}")
    print(f"summary in {out / 'sweep.json'}")
    return EXIT_OK


def load_verdicts(path: str | Path) -> dict[float, bool]:
    doc = json.loads(Path(path).read_text())
    raw = doc.get("verdicts", doc)
    return {float(k): bool(v) for k, v in raw.items()}


def cmd_tune_eps(args) -> int:
    from iesl.analysis.tuning import bisect_eps, max_bisection_probes

    if args.verdicts:
        recorded = load_verdicts(args.verdicts)

        def predicate(eps: float) -> bool:
            for k, v in recorded.items():
                if math.isclose(k, eps, rel_tol=1e-9, abs_tol=1e-12):
                    return v
            raise UsageError(f"no recorded verdict for eps {eps:g}")

    else:
        if not args.game:
            raise UsageError("tune-eps needs --game or --verdicts")
        base = _profile_values(args.game, "iesl", args.profile, args.params_dir)
        ov = _overrides(args)
        ov.update(game=args.game, solver="iesl", out_dir=str(Path(args.out_dir or "runs") / f"tune_{args.game}"))

        def predicate(eps: float):
            s = run_solve(make_config(base, {**ov, "eps": eps})).summary
            return bool(s["convergence"]["converged"]), s["final_nashconv"]

    result = bisect_eps(predicate, args.lo, args.hi, args.precision, check_endpoints=not args.assume_endpoints)
    doc = {
        "interval": list(result.interval),
        "chosen_eps": result.chosen_eps,
        "final_nashconv": result.final_nashconv,
        "probes": [p.__dict__ for p in result.history],
        "bisection_probes": result.bisection_probes,
        "probe_bound": max_bisection_probes(args.lo, args.hi, args.precision),
        "note": result.note,
    }
    print(json.dumps(doc, indent=1))
    if args.output:
        _dump(Path(args.output), doc)
    return EXIT_OK if result.chosen_eps is not None else EXIT_GATE


def count_rows(ranks: int = 3, raise_cap: int = 2, include_synthetic: bool = True, games=None) -> list[dict]:
    rows = []
    for name, expected in REFERENCE_COUNTS.items():
        if games and name not in games:
            continue
        t0 = time.perf_counter()
        opts = {"ranks": ranks, "raise_cap": raise_cap} if name.startswith("leduc") else {}
        tree = game_by_name(name, validate=name != "leduc-3", **opts)
        counts = tree.history_counts()
        matching = [conv for conv, n in counts.items() if (n, tree.num_infosets) == expected]
        rows.append({
            "game": name, "counts": counts, "infosets": tree.num_infosets, "expected": list(expected),
            "matching": matching, "ok": bool(matching), "gated": True, "seconds": time.perf_counter() - t0,
        })
    if include_synthetic:
        for name in SYNTHETIC_GAMES:
            if games and name not in games:
                continue
            tree = game_by_name(name)
            rows.append({
                "game": name, "counts": tree.history_counts(), "infosets": tree.num_infosets, "expected": None,
                "matching": [], "ok": True, "gated": False, "seconds": 0.0,
            })
    return rows


def cmd_verify_counts(args) -> int:
    unknown = set(args.games or ()) - set(REFERENCE_COUNTS) - set(SYNTHETIC_GAMES)
    if unknown:
        raise UsageError(f"unknown games: {sorted(unknown)}")
    rows = count_rows(args.leduc_ranks, args.raise_cap, not args.no_synthetic, args.games)
    if not rows:
        return EXIT_OK
    conventions = list(rows[0]["counts"])
    print("game              " + "  ".join(f"{c:>17}" for c in conventions) + "  infosets  expected       status")
    for r in rows:
        cols = "  ".join(f"{r['counts'][c]:>17}" for c in conventions)
        exp = "-" if r["expected"] is None else "/".join(map(str, r["expected"]))
        status = "exempt" if not r["gated"] else (f"match ({', '.join(r['matching'])})" if r["ok"] else "MISMATCH")
        print(f"{r['game']:<18}{cols}  {r['infosets']:>8}  {exp:<13}  {status}")
    if args.output:
        _dump(Path(args.output), rows)
    return EXIT_OK if all(r["ok"] for r in rows if r["gated"]) else EXIT_GATE


def _anchor_policy(tree, args) -> np.ndarray:
    if not args.anchor:
        return tree.uniform_policy()
    from iesl.solvers import checkpoint
    from iesl.solvers.dynamics import evaluation_policy

    state, game = checkpoint.load(args.anchor)
    if game != args.game:
        raise UsageError(f"anchor checkpoint is for {game}, not {args.game}")
    return evaluation_policy(state, tree)


def cmd_probe_hypomono(args) -> int:
    from iesl.analysis.hypomono import probe_hypomonotonicity

    tree = game_by_name(args.game)
    probe = probe_hypomonotonicity(tree, _anchor_policy(tree, args), args.samples, args.radius, args.seed)
    doc = {
        "game": args.game,
        "samples": args.samples,
        "radius": args.radius,
        "mu_estimate": probe.mu_estimate,
        "mu_estimate_weighted": probe.mu_estimate_weighted,
    }
    if args.eps is not None:
        doc["eps"] = args.eps
        doc["below_eps"] = probe.mu_estimate < args.eps
    print(json.dumps(doc, indent=1))
    return EXIT_OK


def cmd_verify_value_gap(args) -> int:
    from iesl.analysis.value_gap import verify_value_gap

    tree = game_by_name(args.game)
    report = verify_value_gap(tree, args.trials, args.seed)
    ok = report.max_discrepancy <= args.tol
    print(f"{args.game}: {args.trials} trials, max discrepancy {report.max_discrepancy:.3e} (tolerance {args.tol:g}): {'ok' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_GATE


def cmd_eval(args) -> int:
    from iesl.evaluator import nashconv
    from iesl.solvers import checkpoint
    from iesl.solvers.dynamics import evaluation_policy

    state, game = checkpoint.load(args.checkpoint)
    tree = game_by_name(game)
    result = nashconv(tree, evaluation_policy(state, tree))
    print(json.dumps({
        "game": game,
        "solver": state.kind,
        "iterations": state.k,
        "nashconv": result.nashconv,
        "exploitability": result.exploitability.tolist(),
    }, indent=1))
    return EXIT_OK


# ----------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iesl", description="Tabular learning dynamics on small poker games.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver on one game")
    p.add_argument("--config", help="flat 'key = value' config file; flags win")
    p.add_argument("--profile", choices=sorted(profiles.BUDGETS), help="start from the tuned parameters and budget")
    p.add_argument("--params-dir", help="directory of <game>_<solver>.cfg overrides")
    p.add_argument("--resume", help="continue from a checkpoint")
    _add_run_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run all solvers on several games and tabulate final NashConv")
    p.add_argument("games", nargs="*")
    p.add_argument("--budget", type=int, help="iterations per run (default: the profile budget)")
    p.add_argument("--profile", choices=sorted(profiles.BUDGETS), default="default")
    p.add_argument("--params-dir")
    p.add_argument("--solvers", nargs="+", choices=profiles.SOLVER_ORDER)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="runs/compare")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep-eps", help="one IESL run per temperature")
    p.add_argument("--game", required=True)
    p.add_argument("--eps", type=float, nargs="+", required=True)
    p.add_argument("--profile", choices=sorted(profiles.BUDGETS))
    p.add_argument("--params-dir")
    _add_run_flags(p, with_game=False, with_solver=False)
    p.set_defaults(func=cmd_sweep_eps)

    p = sub.add_parser("tune-eps", help="bisect the IESL temperature on convergence verdicts")
    p.add_argument("--game")
    p.add_argument("--lo", type=float, required=True, help="exclusive lower end")
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--precision", type=float, required=True)
    p.add_argument("--verdicts", help="sweep.json (or {eps: bool}) of recorded verdicts instead of live runs")
    p.add_argument("--assume-endpoints", action="store_true", help="do not probe the interval ends")
    p.add_argument("--profile", choices=sorted(profiles.BUDGETS))
    p.add_argument("--params-dir")
    p.add_argument("--output")
    _add_run_flags(p, with_game=False, with_solver=False)
    p.set_defaults(func=cmd_tune_eps)

    p = sub.add_parser("verify-counts", help="check game sizes against the reference table")
    p.add_argument("--leduc-ranks", type=int, default=3)
    p.add_argument("--raise-cap", type=int, default=2)
    p.add_argument("--no-synthetic", action="store_true")
    p.add_argument("--games", nargs="+", help="restrict to these games")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify_counts)

    p = sub.add_parser("probe-hypomono", help="estimate the local hypomonotonicity constant")
    p.add_argument("--game", required=True)
    p.add_argument("--anchor", help="checkpoint whose policy is the anchor (default: uniform)")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--radius", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, help="report whether the estimate is below this temperature")
    p.set_defaults(func=cmd_probe_hypomono)

    p = sub.add_parser("verify-lemma1", help="check the value-gap identity on random policies")
    p.add_argument("--game", required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify_value_gap)

    p = sub.add_parser("eval", help="NashConv of a checkpointed policy")
    p.add_argument("checkpoint")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
