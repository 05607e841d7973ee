"""Time-domain estimators: block statistics, DFA and rescaled range."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateSeriesError, EstimationError, ParameterError
from .base import HurstEstimate, as_array, block_grid, fit_points, safe_log10

# slope of the log-log fit -> Hurst exponent
SLOPE_TO_H = {
    "aggvar": lambda s: (s + 2) / 2,
    "diffvar": lambda s: (s + 2) / 2,
    "absval": lambda s: s + 1,
    "higuchi": lambda s: s + 2,
    "peng": lambda s: s / 2,
    "rar": lambda s: s,
}

TIME_DOMAIN_METHODS = ("aggvar", "diffvar", "absval", "higuchi", "peng")


def _block_means(x: np.ndarray, m: int) -> np.ndarray:
    m = int(m)
    n = x.size
    if m < 1:
        raise ParameterError("block size must be positive")
    k = n // m
    if k < 2:
        raise ParameterError(f"block size {m} leaves fewer than two blocks (n={n})")
    return x[: k * m].reshape(k, m).mean(axis=1)


def agg_var(beta, m: int) -> float:
    """Uncorrected variance (divisor K) of the non-overlapping block means."""
    return float(np.var(_block_means(as_array(beta), m)))


def diff_var(beta, m: int, m_next: int | None = None) -> float:
    """``agg_var(m_next) - agg_var(m)`` with ``m_next = m + 1`` by default."""
    if m_next is None:
        m_next = m + 1
    return agg_var(beta, m_next) - agg_var(beta, m)


def abs_moment(beta, m: int) -> float:
    """Mean absolute value of the block means."""
    return float(np.mean(np.abs(_block_means(as_array(beta), m))))


def higuchi_length(beta, m: int) -> float:
    """Normalised curve length of the partial-sum path at scale ``m``."""
    x = as_array(beta)
    n = x.size
    m = int(m)
    if not 1 <= m <= n / 4:
        raise ParameterError(f"Higuchi scale must satisfy 1 <= m <= n/4 (m={m}, n={n})")
    y = np.concatenate([[0.0], np.cumsum(x)])
    total = 0.0
    for i in range(1, m + 1):
        kmax = (n - i) // m
        path = y[i + m * np.arange(kmax + 1)]
        total += m / (n - i) * np.sum(np.abs(np.diff(path)))
    return float((n - 1) / m**3 * total)


def dfa_fluctuation(beta, m: int) -> float:
    """Mean squared residual of per-block linear fits to the partial sums."""
    x = as_array(beta)
    m = int(m)
    if m < 4:
        raise ParameterError("DFA block size must be at least 4")
    k = x.size // m
    if k < 1:
        raise ParameterError(f"DFA block size {m} exceeds series length {x.size}")
    t = np.cumsum(x)[: k * m].reshape(k, m)
    # abscissae are identical up to a shift in every block
    loc = np.arange(m) - (m - 1) / 2
    tc = t - t.mean(axis=1, keepdims=True)
    slope = tc @ loc / (loc @ loc)
    resid = tc - slope[:, None] * loc
    return float(np.mean(resid**2))


def _range_over_scale(x: np.ndarray) -> float:
    n = x.size
    dev = x - x.mean()
    partial = np.cumsum(dev)
    r = partial.max() - partial.min()
    s = np.sqrt(np.sum(dev**2) / (n - 1))
    if not s > 0:
        raise DegenerateSeriesError("constant series: R/S scale is zero")
    return r / s


def rs_simple(beta) -> HurstEstimate:
    """Single-point R/S estimate ``log10(R/S) / log10(n)``."""
    x = as_array(beta)
    n = x.size
    if n < 2:
        raise ParameterError("R/S needs at least two observations")
    rs = _range_over_scale(x)
    if not rs > 0:
        raise EstimationError("R/S statistic is zero")
    h = np.log10(rs) / np.log10(n)
    return HurstEstimate("rs", h, {"R_over_S": float(rs)}, {"n": n})


def adjusted_rescaled_range(x) -> float:
    """Rescaled adjusted range of the partial sums (variance divisor n).

    Returns NaN for a constant series.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    y = np.cumsum(x)
    t = np.arange(1, n + 1)
    bridge = y - t / n * y[-1]
    s = np.sqrt(np.mean((x - x.mean()) ** 2))
    if not s > 0:
        return float("nan")
    return float((bridge.max() - bridge.min()) / s)


def default_sub_lengths(n: int, count: int = 20) -> np.ndarray:
    if n < 8:
        raise EstimationError("series too short for rescaled adjusted range")
    return np.unique(np.round(np.geomspace(8, n, count)).astype(int))


def rescaled_adjusted_range(beta, sub_lengths=None) -> HurstEstimate:
    """Slope of log10(R/S) against log10(sub-length) over leading sub-series."""
    x = as_array(beta)
    sizes = default_sub_lengths(x.size) if sub_lengths is None else np.asarray(sub_lengths, dtype=int)
    if sizes.size < 3 or np.any(sizes < 8) or np.any(sizes > x.size):
        raise ParameterError("need at least three sub-lengths in [8, n]")
    stats = np.array([adjusted_rescaled_range(x[:k]) for k in sizes])
    reg = fit_points(np.log10(sizes), safe_log10(stats))
    return HurstEstimate(
        "rar",
        SLOPE_TO_H["rar"](reg.slope),
        {"regression": reg},
        {"sub_lengths": sizes.tolist()},
    )


def _statistic(method: str):
    return {
        "aggvar": agg_var,
        "absval": abs_moment,
        "higuchi": higuchi_length,
        "peng": dfa_fluctuation,
    }[method]


def estimate_time_domain(beta, method: str, M_grid=None) -> HurstEstimate:
    """Block-statistic estimators: compute the statistic over ``M_grid``,
    fit log10(statistic) on log10(m) and map the slope to H.

    ``diffvar`` uses the decrease of the aggregated variance between
    consecutive grid sizes, so its abscissae are all but the last grid point.
    """
    if method not in TIME_DOMAIN_METHODS:
        raise ParameterError(f"unknown time-domain method {method!r}")
    x = as_array(beta)
    if M_grid is None:
        M_grid = block_grid(x.size, m_min=8 if method == "peng" else 4)
    grid = np.asarray(M_grid, dtype=int)
    if method == "diffvar":
        variances = np.array([agg_var(x, m) for m in grid])
        stat = variances[:-1] - variances[1:]
        abscissa = grid[:-1]
    else:
        fn = _statistic(method)
        stat = np.array([fn(x, m) for m in grid])
        abscissa = grid
    if method in ("aggvar", "peng") and not np.any(stat > 0):
        raise DegenerateSeriesError(f"{method}: statistic vanishes on every block size")
    reg = fit_points(np.log10(abscissa), safe_log10(stat))
    return HurstEstimate(
        method,
        SLOPE_TO_H[method](reg.slope),
        {"regression": reg, "statistic": stat},
        {"M_grid": grid.tolist()},
    )
