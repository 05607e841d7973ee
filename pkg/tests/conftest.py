import numpy as np
import pytest
from scipy.special import gammaln

from fhurst.fts import FunctionalSeries, Grid


def arfima0d0(d, n, rng, lags=None):
    """Scalar ARFIMA(0, d, 0) by a long truncated MA filter.

    Coefficients come from log-gamma ratios, independently of the package's
    recursion.
    """
    if lags is None:
        lags = 2 * n
    k = np.arange(lags + 1)
    if d == 0:
        psi = np.zeros(lags + 1)
        psi[0] = 1.0
    else:
        psi = np.exp(gammaln(k + d) - gammaln(d) - gammaln(k + 1))
    eps = rng.standard_normal(n + lags)
    return np.convolve(eps, psi, mode="valid")[:n]


def trapezoid_weights(w):
    step = 1.0 / (w - 1)
    out = [step] * w
    out[0] = out[-1] = step / 2
    return np.array(out)


def random_panel(rng, n, w):
    return FunctionalSeries(Grid.uniform(w), rng.standard_normal((n, w)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
