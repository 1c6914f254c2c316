import pytest

from scdopt.instance import GenConfig, generate_instance


@pytest.fixture
def small_instance():
    return generate_instance(GenConfig(3, 4, seed=11))


@pytest.fixture
def two_by_two():
    return generate_instance(GenConfig(2, 2, seed=42))


CRITERIA: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert on it."""
    def record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        CRITERIA.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
