import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sgx.gallery import build_square_monoid  # noqa: E402
from sgx.semigroup import adjoin_identity, build_free_nilpotent  # noqa: E402


@pytest.fixture(scope="session")
def square():
    return build_square_monoid()


@pytest.fixture(scope="session")
def fn4one():
    return adjoin_identity(build_free_nilpotent("ab", 4))


@pytest.fixture(scope="session")
def fn5one():
    return adjoin_identity(build_free_nilpotent("ab", 5))


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(acc.RESULTS, key=str):
        terminalreporter.write_line(acc.RESULTS[key])
