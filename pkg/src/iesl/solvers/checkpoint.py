"""Versioned JSON checkpoints of :class:`SolverState`.

Floats are written with ``repr`` (shortest round-tripping form), so a load
restores every table bit for bit. Tables are stored in the game's canonical
sequence-slot order.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from iesl.solvers.dynamics import KINDS, SolverState

FORMAT = "iesl-solver-state"
VERSION = 1


def _float(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _unfloat(x) -> float:
    return float(x)


def dumps(state: SolverState, game: str) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "game": game,
        "kind": state.kind,
        "k": state.k,
        "params": state.params,
        "last_residual": _float(state.last_residual),
        "max_abs_w": _float(state.max_abs_w),
        "tables": {name: [_float(v) for v in state.tables[name].tolist()] for name in sorted(state.tables)},
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def loads(text: str) -> tuple[SolverState, str]:
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise ValueError("not a solver checkpoint")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    if doc["kind"] not in KINDS:
        raise ValueError(f"unknown solver kind {doc['kind']!r}")
    state = SolverState(
        kind=doc["kind"],
        k=int(doc["k"]),
        params=dict(doc["params"]),
        tables={name: np.array([_unfloat(v) for v in values], dtype=float) for name, values in doc["tables"].items()},
        last_residual=_unfloat(doc["last_residual"]),
        max_abs_w=_unfloat(doc["max_abs_w"]),
    )
    return state, doc["game"]


def save(path: str | Path, state: SolverState, game: str) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(dumps(state, game))
    tmp.replace(path)


def load(path: str | Path) -> tuple[SolverState, str]:
    return loads(Path(path).read_text())
