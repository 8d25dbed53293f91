import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

TESTS = Path(__file__).parent
ROOT = TESTS.parent
sys.path.insert(0, str(TESTS))

from qsync.cli import load_config  # noqa: E402
from qsync.hilbert import CompositeSpace  # noqa: E402
from qsync.lindblad import steady_state  # noqa: E402
from qsync.scenarios import build_scenario  # noqa: E402

CONFIGS = ROOT / "configs"

#: acceptance lines collected by test_acceptance, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@lru_cache(maxsize=None)
def config_state(name: str):
    """``(cfg, space, rho)`` for a shipped config, solved once per session."""
    cfg = load_config(CONFIGS / f"{name}.json")
    rho = steady_state(build_scenario(cfg.systems, cfg.interaction)[2])
    return cfg, CompositeSpace(cfg.systems), rho


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
