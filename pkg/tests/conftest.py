import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from corpus import EMPTY, INSTANCE_A, INSTANCE_B, TINY, WITNESS_B  # noqa: E402

from wwtpp.runner import command_from_env  # noqa: E402


@pytest.fixture
def inst_a():
    return INSTANCE_A


@pytest.fixture
def inst_b():
    return INSTANCE_B


@pytest.fixture
def inst_b3():
    return INSTANCE_B.with_periods(3)


@pytest.fixture
def empty_inst():
    return EMPTY


@pytest.fixture
def tiny():
    return TINY


@pytest.fixture
def witness_b():
    return WITNESS_B


def _solver(kind):
    cmd = command_from_env(kind)
    if cmd is None:
        var = {"smt": "WWTPP_SMT_SOLVER", "milp": "WWTPP_MILP_SOLVER", "flatzinc": "WWTPP_FZN_SOLVER"}[kind]
        pytest.skip(f"no {kind} solver configured: set {var} to a command template with {{}}")
    return cmd


@pytest.fixture
def smt_solver():
    return _solver("smt")


@pytest.fixture
def milp_solver():
    return _solver("milp")


@pytest.fixture
def fzn_solver():
    return _solver("flatzinc")


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        status = "PASS" if ok is True else ("SKIP" if ok is None else "FAIL")
        ACCEPTANCE_LINES.append((str(number), f"criterion {number}: {status} - {detail}"))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
            terminalreporter.write_line(line)
