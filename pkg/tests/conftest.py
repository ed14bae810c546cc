import json
from pathlib import Path

import numpy as np
import pytest

from conicstab import serialize

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_problem(name):
    return serialize.decode_problem(json.loads((FIXTURES / name).read_text()), name)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_psd(rng, n, rank=None, complex_=False):
    rank = n if rank is None else rank
    B = rng.standard_normal((n, rank))
    if complex_:
        B = B + 1j * rng.standard_normal((n, rank))
    return B @ B.conj().T


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
