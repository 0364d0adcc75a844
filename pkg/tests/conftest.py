import os
from pathlib import Path

import numpy as np
import pytest

from tailrisk.series import ReturnSeries, read_csv

COINS = ("bitcoin", "ethereum", "litecoin", "monero", "ripple")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def data_dir():
    path = os.environ.get("TAILRISK_DATA")
    return Path(path) if path else None


def load_coin(name: str) -> ReturnSeries:
    """Coin CSV (date,price) from $TAILRISK_DATA, or skip the test."""
    root = data_dir()
    if root is None:
        pytest.skip("TAILRISK_DATA not set; dataset-conditional check skipped")
    path = root / f"{name}.csv"
    if not path.exists():
        pytest.skip(f"{path} not found")
    return read_csv(path, "price", name)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion and assert on it."""

    def record(number, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
