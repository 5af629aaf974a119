from functools import lru_cache
from pathlib import Path

import pytest

from offshore.difftest import corpus
from offshore.emit import find_compiler

FIXTURES = Path(__file__).parent / "fixtures"

EQ1 = "let x = ref 0 in let y = x in y := 41; !x + 1"
RUNNING = "let x = ref 0 in x := !x + 1"


@lru_cache(maxsize=None)
def cached_corpus(count: int, seed: int = 0, depth: int = 8, alias_bias: float = 0.3,
                  bare_ref_rate: float = 0.0) -> tuple:
    return tuple(corpus(count, seed, depth, alias_bias, bare_ref_rate))


@pytest.fixture(scope="session")
def small_corpus():
    return cached_corpus(300, seed=11)


@pytest.fixture(scope="session")
def compiler():
    cmd = find_compiler()
    if cmd is None:
        pytest.skip("no C compiler available")
    return cmd


# criterion number -> "criterion N (name): PASS|FAIL|SKIP detail"
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
