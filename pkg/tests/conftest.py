import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import RESULTS  # noqa: E402
from bcregion import models, setfam  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        verdict, detail = RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {verdict}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def constant_model(k_total, x_alphabet=2, y_alphabet=2):
    """Every auxiliary has alphabet 1; X is the constant 0."""
    alph = {s: 1 for s in setfam.power_set(k_total)}
    n_y = y_alphabet ** k_total
    chan = np.random.default_rng(0).dirichlet(np.ones(n_y), size=x_alphabet).ravel()
    return models.make_spec(k_total, alph, [1.0], [0], x_alphabet, (y_alphabet,) * k_total, chan)


def independent_model(k_total, rng):
    """Mutually independent auxiliaries, each a biased bit."""
    alph = {s: 2 for s in setfam.power_set(k_total)}
    pmf = np.ones(1)
    for s in setfam.power_set(k_total):
        q = rng.uniform(0.2, 0.8)
        pmf = np.multiply.outer(pmf, np.array([q, 1 - q])).ravel()
    f = rng.integers(0, 2, size=pmf.size)
    chan = rng.dirichlet(np.ones(2 ** k_total), size=2).ravel()
    return models.make_spec(k_total, alph, pmf, f, 2, (2,) * k_total, chan)
