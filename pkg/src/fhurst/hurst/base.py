"""Result types and the log-log regression shared by all estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, EstimationError
from ..fts import ScoreSeries

HUBER_T = 1.345


@dataclass(frozen=True)
class RegressionPoints:
    xs: np.ndarray
    ys: np.ndarray
    slope: float
    intercept: float
    robust: bool = False
    dropped: int = 0

    def to_dict(self):
        return {
            "xs": [float(v) for v in self.xs],
            "ys": [float(v) for v in self.ys],
            "slope": float(self.slope),
            "intercept": float(self.intercept),
            "robust": bool(self.robust),
            "dropped": int(self.dropped),
        }


@dataclass(frozen=True)
class HurstEstimate:
    """An estimate of the Hurst exponent; ``d`` is always ``H - 1/2``."""

    method: str
    H: float
    diagnostics: dict = field(default_factory=dict)
    bandwidths: dict = field(default_factory=dict)
    d: float = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.H):
            raise EstimationError(f"{self.method}: non-finite estimate")
        object.__setattr__(self, "H", float(self.H))
        object.__setattr__(self, "d", self.H - 0.5)

    @classmethod
    def from_d(cls, method, d, diagnostics=None, bandwidths=None):
        return cls(method, float(d) + 0.5, diagnostics or {}, bandwidths or {})

    def to_dict(self):
        diag = {
            k: (v.to_dict() if isinstance(v, RegressionPoints) else _jsonable(v))
            for k, v in self.diagnostics.items()
        }
        return {
            "method": self.method,
            "H": self.H,
            "d": self.d,
            "bandwidths": _jsonable(self.bandwidths),
            "diagnostics": diag,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def as_array(beta) -> np.ndarray:
    if isinstance(beta, ScoreSeries):
        beta = beta.values
    x = np.asarray(beta, dtype=float)
    if x.ndim != 1:
        raise ContractError("expected a univariate series")
    if not np.all(np.isfinite(x)):
        raise ContractError("series contains non-finite values")
    return x


def _ols(x, y, w=None):
    if w is None:
        w = np.ones_like(x)
    sw = w.sum()
    xm = (w @ x) / sw
    ym = (w @ y) / sw
    sxx = w @ (x - xm) ** 2
    slope = (w @ ((x - xm) * (y - ym))) / sxx
    return slope, ym - slope * xm


def log_log_fit(xs, ys, robust: bool = False, max_iter: int = 50, tol: float = 1e-10):
    """Straight-line fit ``ys ~ intercept + slope * xs``.

    Ordinary least squares, or Huber-weighted IRLS (tuning constant 1.345,
    MAD scale) when ``robust`` is set.  Returns ``(slope, intercept)``.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size or x.size < 3:
        raise EstimationError("need at least three regression points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise EstimationError("regression points must be finite")
    if np.ptp(x) == 0:
        raise EstimationError("degenerate abscissae")
    slope, intercept = _ols(x, y)
    if not robust:
        return float(slope), float(intercept)
    floor = np.finfo(float).eps * (1.0 + np.max(np.abs(y)))
    for _ in range(max_iter):
        resid = y - intercept - slope * x
        scale = np.median(np.abs(resid - np.median(resid))) / 0.6744897501960817
        scale = max(scale, floor)
        u = np.abs(resid) / scale
        w = np.where(u <= HUBER_T, 1.0, HUBER_T / np.maximum(u, HUBER_T))
        new_slope, new_intercept = _ols(x, y, w)
        done = abs(new_slope - slope) < tol and abs(new_intercept - intercept) < tol
        slope, intercept = new_slope, new_intercept
        if done:
            break
    return float(slope), float(intercept)


def fit_points(xs, ys, robust: bool = False) -> RegressionPoints:
    """Drop non-finite points, fit, and package the regression."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    slope, intercept = log_log_fit(x[keep], y[keep], robust=robust)
    return RegressionPoints(x[keep], y[keep], slope, intercept, robust, int((~keep).sum()))


def safe_log10(values):
    """log10 of positive entries; NaN where the value is not positive."""
    v = np.asarray(values, dtype=float)
    out = np.full(v.shape, np.nan)
    pos = v > 0
    out[pos] = np.log10(v[pos])
    return out


def block_grid(n: int, m_min: int = 4, count: int = 30, m_max: int | None = None) -> np.ndarray:
    """Block sizes equispaced on a log scale between ``m_min`` and ``n // 4``."""
    top = n // 4 if m_max is None else m_max
    if top < m_min:
        raise EstimationError(f"series of length {n} too short for block sizes >= {m_min}")
    return np.unique(np.round(np.geomspace(m_min, top, count)).astype(int))
