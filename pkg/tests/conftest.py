from pathlib import Path

import pytest

from ionwire import typical_config
from ionwire.dynamics import desk_scaled

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

_criteria: list[str] = []


@pytest.fixture
def cfg():
    return typical_config()


@pytest.fixture
def desk():
    """Typical geometry with the trap frequency lowered to gamma/(m w^2) = 1e-3."""
    return desk_scaled(typical_config(wire_resistance=0.0), 1e-3)


@pytest.fixture
def config_path():
    return CONFIG_DIR / "ca40_surface_trap.cfg"


@pytest.fixture
def report_criterion():
    def report(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        _criteria.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criteria):
            terminalreporter.write_line(line)
