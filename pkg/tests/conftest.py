import pytest

from lcmpsi.sieve import build_prime_table


@pytest.fixture(scope="session")
def t100():
    return build_prime_table(100)


@pytest.fixture(scope="session")
def t1e4():
    return build_prime_table(10**4)


@pytest.fixture(scope="session")
def t1e6():
    return build_prime_table(10**6)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(terminalreporter.config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
