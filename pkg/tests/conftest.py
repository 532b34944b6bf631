import sys
from pathlib import Path

import numpy as np
import pytest

from iesl.game.build import game_by_name
from iesl.game.policy import BehavioralPolicy

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def kuhn2():
    return game_by_name("kuhn-2")


@pytest.fixture(scope="session")
def kuhn3():
    return game_by_name("kuhn-3")


@pytest.fixture(scope="session")
def leduc2():
    return game_by_name("leduc-2")


@pytest.fixture(scope="session")
def pennies():
    return game_by_name("matching-pennies")


@pytest.fixture(scope="session")
def two_step():
    return game_by_name("two-step")


def policy_by_key(tree, table: dict) -> np.ndarray:
    """Behavioral policy from ``{infoset key: probabilities}``; unlisted infosets are uniform."""
    rows = {}
    for s in tree.infosets:
        rows[s.id] = table.get(s.key, np.full(s.num_actions, 1.0 / s.num_actions))
    return np.asarray(BehavioralPolicy.from_dict(tree, rows))


J, Q, K = 0, 1, 2
# (pass, bet) probabilities; first player bluffs the jack with alpha = 1/3
KUHN2_NASH = {
    (J, ""): (2 / 3, 1 / 3),
    (Q, ""): (1.0, 0.0),
    (K, ""): (0.0, 1.0),
    (J, "pb"): (1.0, 0.0),
    (Q, "pb"): (1 / 3, 2 / 3),
    (K, "pb"): (0.0, 1.0),
    (J, "p"): (2 / 3, 1 / 3),
    (Q, "p"): (1.0, 0.0),
    (K, "p"): (0.0, 1.0),
    (J, "b"): (1.0, 0.0),
    (Q, "b"): (2 / 3, 1 / 3),
    (K, "b"): (0.0, 1.0),
}


# ----------------------------------------------------------------- acceptance reporting
ACCEPTANCE_LINES: list[str] = []
SLOW_ENV = "IESL_RUN_SLOW"


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", help="run tests marked slow (hours on one core)")


def pytest_collection_modifyitems(config, items):
    import os

    if config.getoption("--run-slow") or os.environ.get(SLOW_ENV) == "1":
        return
    skip = pytest.mark.skip(reason=f"slow; pass --run-slow or set {SLOW_ENV}=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records one pass/fail line and returns ``ok``."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record
