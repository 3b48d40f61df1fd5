from pathlib import Path

import pytest

from clusterstats.glm import FrequencyDataset

FIXTURES = Path(__file__).parent / "fixtures"

# criterion number -> (description, passed); filled by test_acceptance.py
ACCEPTANCE = {}


def shift_groups(deaths):
    return FrequencyDataset.from_columns(
        {"nurse": ["yes", "yes", "no", "no"], "morning": ["yes", "no", "yes", "no"]},
        exposure=[8, 7, 2, 28],
        events=deaths,
    )


@pytest.fixture
def shifts_unbiased():
    return shift_groups([7, 3, 2, 4])


@pytest.fixture
def shifts_biased():
    return shift_groups([8, 4, 1, 3])


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        description, passed = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {description}")
