import functools

import pytest

from rampuc import rolling
from rampuc.cli import window_model
from rampuc.system import toy_study, with_config
from rampuc.ucmodel import solve_model


@functools.lru_cache(maxsize=None)
def toy_window(formulation: str, window: int):
    """(model, solution) of a toy rolling window, solved once per session."""
    study = with_config(toy_study(), formulation=formulation)
    m, _ = window_model(study, window)
    return m, solve_model(m)


@functools.lru_cache(maxsize=None)
def toy_roll(formulation: str):
    return rolling.run(toy_study(), formulation=formulation)


@pytest.fixture
def toy():
    return toy_study()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
