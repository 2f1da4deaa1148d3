import os
from pathlib import Path

import pytest

CACHE = Path(__file__).resolve().parent.parent / ".qtml_cache"
os.environ.setdefault("QTML_CACHE_DIR", str(CACHE))

from qtml.analysis.kernel import KernelBank  # noqa: E402
from qtml.eigenform import eigenform_table, load_or_build  # noqa: E402

BIG = 10**6


@pytest.fixture(scope="session")
def cache_dir():
    CACHE.mkdir(exist_ok=True)
    return CACHE


@pytest.fixture(scope="session")
def table12(cache_dir):
    return load_or_build(12, BIG, cache_dir)


@pytest.fixture(scope="session")
def table18(cache_dir):
    return load_or_build(18, BIG, cache_dir)


@pytest.fixture(scope="session")
def small12():
    return eigenform_table(12, 20_000)


@pytest.fixture(scope="session")
def bank():
    return KernelBank()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
