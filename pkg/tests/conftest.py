"""Pytest configuration and shared fixtures."""

import pytest
from pathlib import Path

from src.engine import Engine, ExecConfig
from src.models import Program
from src.parser import parse_program

SAMPLES_DIR = Path(__file__).parent.parent / "samples"


@pytest.fixture
def samples_dir():
    """Directory holding the sample .ch and .mj programs."""
    return SAMPLES_DIR


@pytest.fixture
def get_age_source():
    """The hand-written choose version of the employee age lookup."""
    return (SAMPLES_DIR / "getAge.ch").read_text(encoding="utf-8")


@pytest.fixture
def get_age_program(get_age_source):
    """Parsed employee age lookup program."""
    return parse_program(get_age_source)


@pytest.fixture
def countdown_program():
    """A recursive countdown that records how far it got."""
    return parse_program("""
        proc cd(n) {
            choose(n == 0; done = true, n > 0; last = n; cd(n - 1))
        }
    """)


@pytest.fixture
def traced_engine():
    """
    Build an Engine on a copy of a program's state that records trace events.

    Returns a factory: make(program) -> (engine, events).
    """
    def make(program: Program, max_depth: int = 100):
        events = []
        working = Program(program.defs, program.state.copy())
        engine = Engine(working, ExecConfig(max_depth=max_depth, trace_sink=events.append))
        return engine, events
    return make


@pytest.fixture
def temp_data_dir(tmp_path):
    """Create a temporary data directory for testing."""
    data_dir = tmp_path / "test_data"
    data_dir.mkdir()
    return data_dir
