import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import ltsort

# one line per acceptance criterion, echoed after the run summary
ACCEPTANCE_REPORT = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    # compile the numba kernel once so timed tests measure work, not compilation
    rng = np.random.default_rng(0)
    block = ltsort.SourceBlock.random(8, 2, rng)
    dist = ltsort.robust_soliton(8, 0.1, 0.5)
    syms = ltsort.generate_symbols(block, dist, 6, rng)
    ltsort.build_schedule(syms, 0.3, "lowest_index", engine="fast")


@pytest.fixture(scope="session")
def rsd_distribution():
    return ltsort.robust_soliton(1000, 0.05, 0.01)
