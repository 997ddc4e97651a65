from pathlib import Path

import pytest

from minisol_iv.engine import analyze_contract
from minisol_iv.frontend import parse_source, resolve

FIXTURES = Path(__file__).parent / "fixtures"
VULNERABLE = sorted((FIXTURES / "vulnerable").glob("*.sol"))
PATCHED = sorted((FIXTURES / "patched").glob("*.sol"))
EXTRA = sorted((FIXTURES / "extra").glob("*.sol"))
CORPUS = VULNERABLE + PATCHED + EXTRA


def load(src):
    unit = parse_source(src)
    return unit, resolve(unit)


def analyze_source(src, contract=0, widen_delay=3):
    unit, table = load(src)
    return analyze_contract(table.contract(unit.contracts[contract]), widen_delay)


def analyze_fixture(path, widen_delay=3):
    return analyze_source(Path(path).read_text(), widen_delay=widen_delay)


def fixture(rel):
    return FIXTURES / rel


def wrap(body, extra=""):
    """A one-function contract around `body`, for quick engine checks."""
    return f"contract T {{ {extra} function f(uint a, uint b) external {{ {body} }} }}"


@pytest.fixture
def vote_analysis():
    return analyze_fixture(fixture("vulnerable/unmatched_enum.sol"))
