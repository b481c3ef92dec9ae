import random
from pathlib import Path

import pytest
import sympy as sp

GOLDEN = Path(__file__).parent / "golden"


def read_golden(name: str) -> dict[str, str]:
    rows = {}
    for line in (GOLDEN / name).read_text().splitlines():
        key, _, value = line.partition(": ")
        rows[key] = value
    return rows


@pytest.fixture
def rng():
    return random.Random(20240611)


def to_sympy(p, k, s):
    """Render a DiffPoly with ``k`` a sympy expression in ``s``."""
    expr = sp.Integer(0)
    for (g, exps), c in p.items():
        term = sp.Rational(c.numerator, c.denominator) * sp.Symbol("G") ** g
        for m, e in enumerate(exps):
            term *= sp.diff(k, s, m) ** e
        expr += term
    return expr


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record and print one pass/fail line for an acceptance criterion."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
