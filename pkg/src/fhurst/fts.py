"""Discretised functional time series and dynamic functional PCA.

Curves live on a uniform grid over [0, 1] and every integral is replaced by
trapezoidal quadrature.  The long-run covariance surface is estimated either
by lag-weighting the sample autocovariance surfaces or by a kernel sandwich
with a plug-in bandwidth; its leading eigenfunction gives the score series
that the Hurst estimators consume.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.ndimage import convolve1d

from .errors import ContractError, DegenerateSeriesError, EstimationError, ParameterError

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform evaluation grid with trapezoidal quadrature weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim != 1 or points.shape != weights.shape or points.size < 1:
            raise ContractError("grid points and weights must be 1-d arrays of equal length")
        if points.size > 1 and np.any(np.diff(points) <= 0):
            raise ContractError("grid points must be strictly increasing")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ContractError("quadrature weights must sum to one")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, size: int) -> "Grid":
        """``size`` equally spaced points on [0, 1], endpoints included.

        ``size == 1`` is a degenerate grid holding the single point 1.0 with
        unit weight; it turns the functional machinery into a scalar one.
        """
        size = int(size)
        if size < 1:
            raise ParameterError("grid needs at least one point")
        if size == 1:
            return cls(np.array([1.0]), np.array([1.0]))
        points = np.linspace(0.0, 1.0, size)
        step = 1.0 / (size - 1)
        weights = np.full(size, step)
        weights[0] = weights[-1] = step / 2
        return cls(points, weights)

    @property
    def size(self) -> int:
        return self.points.size

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(self.weights * f * g))

    def surface_norm2(self, values: np.ndarray) -> float:
        """Squared L2 norm of a surface under the product quadrature rule."""
        return float(self.weights @ (values**2) @ self.weights)

    def diagonal_integral(self, values: np.ndarray) -> float:
        return float(self.weights @ np.diag(values))

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.points.tobytes(), self.weights.tobytes()))


@dataclass(frozen=True)
class FunctionalSeries:
    """``n`` curves observed on a common grid; row ``t`` is curve ``t``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != self.grid.size:
            raise ContractError(
                f"values must have shape (n, {self.grid.size}), got {values.shape}"
            )
        if values.shape[0] < 2:
            raise ContractError("a functional series needs at least two curves")
        if not np.all(np.isfinite(values)):
            raise ContractError("curve values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CovSurface:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        w = self.grid.size
        if values.shape != (w, w):
            raise ContractError(f"surface must be {w}x{w}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ContractError("surface values must be finite")
        object.__setattr__(self, "values", values)

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T)))


@dataclass(frozen=True)
class EigenSystem:
    """Leading eigenpairs of a covariance operator.

    ``degenerate`` is set when the operator is numerically zero; scores cannot
    be extracted from such a system.
    """

    grid: Grid
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class ScoreSeries:
    values: np.ndarray
    component_index: int = 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise ContractError("scores must be a finite 1-d array")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


# ---------------------------------------------------------------------------
# Lag-window kernels


def _bartlett(x):
    ax = np.abs(x)
    return np.where(ax <= 1, 1 - ax, 0.0)


def _parzen(x):
    ax = np.abs(x)
    return np.where(
        ax <= 0.5,
        1 - 6 * ax**2 + 6 * ax**3,
        np.where(ax <= 1, 2 * (1 - ax) ** 3, 0.0),
    )


def _tukey_hanning(x):
    ax = np.abs(x)
    return np.where(ax <= 1, (1 + np.cos(np.pi * ax)) / 2, 0.0)


def _quadratic_spectral(x):
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0
    z = 6 * np.pi * x[nz] / 5
    out[nz] = 25 / (12 * np.pi**2 * x[nz] ** 2) * (np.sin(z) / z - np.cos(z))
    return out


def _flat_top(x):
    ax = np.abs(x)
    return np.where(ax <= 0.5, 1.0, np.where(ax <= 1, 2 * (1 - ax), 0.0))


@dataclass(frozen=True)
class KernelSpec:
    """Lag window ``W_q`` with its order and the two plug-in constants.

    ``w_const`` is ``lim |x|^-q (1 - W(x))`` at the origin and ``l2_const`` is
    ``int W(x)^2 dx``.  ``support`` is ``None`` for infinite support.
    """

    name: str
    order: float
    w_const: float | None
    l2_const: float
    support: float | None
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))


KERNELS = {
    "bartlett": KernelSpec("bartlett", 1, 1.0, 2 / 3, 1.0, _bartlett),
    "parzen": KernelSpec("parzen", 2, 6.0, 0.539285, 1.0, _parzen),
    "tukey_hanning": KernelSpec("tukey_hanning", 2, math.pi**2 / 4, 3 / 4, 1.0, _tukey_hanning),
    "quadratic_spectral": KernelSpec(
        "quadratic_spectral", 2, 18 * math.pi**2 / 125, 1.0, None, _quadratic_spectral
    ),
    "flat_top": KernelSpec("flat_top", math.inf, None, 4 / 3, 1.0, _flat_top),
}


def get_kernel(kernel) -> KernelSpec:
    if isinstance(kernel, KernelSpec):
        return kernel
    try:
        return KERNELS[kernel]
    except KeyError:
        raise ParameterError(f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}") from None


# ---------------------------------------------------------------------------
# Moments and covariance surfaces


def sample_mean(fs: FunctionalSeries) -> np.ndarray:
    return fs.values.mean(axis=0)


def _centered(fs: FunctionalSeries) -> np.ndarray:
    return fs.values - sample_mean(fs)


def autocov_surface(fs: FunctionalSeries, lag: int) -> CovSurface:
    """Sample autocovariance surface at ``lag`` with divisor ``n``.

    Negative lags give the transposed surface of the positive lag.
    """
    n = fs.n
    lag = int(lag)
    if abs(lag) > n - 1:
        raise ParameterError(f"lag {lag} outside [-(n-1), n-1] for n={n}")
    xc = _centered(fs)
    if lag >= 0:
        vals = xc[: n - lag].T @ xc[lag:] / n
    else:
        vals = xc[-lag:].T @ xc[: n + lag] / n
    return CovSurface(fs.grid, vals)


def _lag_weighted_sum(xc: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sum_l weights[|l|] * gamma_l`` for |l| < len(weights).

    Uses the identity ``sum_l w_l gamma_l = Xc' T Xc / n`` with the banded
    symmetric Toeplitz matrix ``T[j, k] = w_|j-k|``.
    """
    n = xc.shape[0]
    band = np.concatenate([weights[:0:-1], weights])
    smoothed = convolve1d(xc, band, axis=0, mode="constant", cval=0.0)
    vals = xc.T @ smoothed / n
    return (vals + vals.T) / 2


def lrc_lag_weighted(fs: FunctionalSeries, normalized: bool = False, alpha: float = 1.0) -> CovSurface:
    """Long-run covariance with linearly decreasing lag weights ``n - |l|``.

    Lags run over ``|l| <= min(n - 1, W)``.  With ``normalized`` the sum is
    divided by ``n**(3 - 2*alpha)``; the eigenfunctions do not depend on it.
    """
    n = fs.n
    if normalized and not (0 < alpha <= 1.5):
        raise ParameterError("alpha must lie in (0, 3/2]")
    lmax = min(n - 1, fs.grid.size)
    weights = (n - np.arange(lmax + 1)).astype(float)
    vals = _lag_weighted_sum(_centered(fs), weights)
    if normalized:
        vals = vals / float(n) ** (3 - 2 * alpha)
    return CovSurface(fs.grid, vals)


def _kernel_lag_weights(kernel: KernelSpec, h: float, n: int, power: int = 0) -> np.ndarray:
    lags = np.arange(n, dtype=float)
    w = kernel(lags / h)
    if power:
        w = w * lags**power
    nz = np.nonzero(w)[0]
    return w[: nz[-1] + 1] if nz.size else w[:1]


def lrc_kernel(fs: FunctionalSeries, kernel="bartlett", h: float = 1.0, power: int = 0) -> CovSurface:
    """Kernel sandwich estimator ``sum_l W(l/h) |l|^power gamma_l``."""
    if not h > 0:
        raise ParameterError("bandwidth h must be positive")
    kernel = get_kernel(kernel)
    weights = _kernel_lag_weights(kernel, float(h), fs.n, power)
    return CovSurface(fs.grid, _lag_weighted_sum(_centered(fs), weights))


def plugin_constant(fs: FunctionalSeries, initial="flat_top", final="bartlett", h1: float | None = None):
    """Return ``(c0, h1)`` for the plug-in bandwidth rule.

    The pilot surfaces use the initial kernel at bandwidth ``h1`` (default
    ``n**(1/5)``); ``w`` comes from the final kernel and ``int W^2`` from the
    initial one.
    """
    initial = get_kernel(initial)
    final = get_kernel(final)
    if final.w_const is None or not math.isfinite(final.order):
        raise ParameterError("the final kernel must have a finite order and a w constant")
    if h1 is None:
        h1 = fs.n ** 0.2
    if not h1 > 0:
        raise ParameterError("initial bandwidth must be positive")
    q = final.order
    grid = fs.grid
    pilot0 = lrc_kernel(fs, initial, h1).values
    pilotq = lrc_kernel(fs, initial, h1, power=int(q)).values
    num = 2 * q * grid.surface_norm2(final.w_const * pilotq)
    den = (grid.surface_norm2(pilot0) + grid.diagonal_integral(pilot0) ** 2) * initial.l2_const
    if not (num > 0 and den > 0):
        raise EstimationError("plug-in bandwidth undefined: pilot covariance surfaces vanish")
    c0 = (num / den) ** (1 / (1 + 2 * q))
    return c0, h1


def plugin_bandwidth(fs: FunctionalSeries, initial="flat_top", final="bartlett", h1: float | None = None) -> float:
    """Data-driven bandwidth ``c0 * n**(1/(1+2q))`` for the final kernel."""
    c0, _ = plugin_constant(fs, initial, final, h1)
    q = get_kernel(final).order
    return c0 * fs.n ** (1 / (1 + 2 * q))


# ---------------------------------------------------------------------------
# Eigendecomposition and scores


def eigendecompose(surface: CovSurface, n_components: int | None = None) -> EigenSystem:
    """Top eigenpairs of the quadrature-discretised integral operator.

    Eigenfunctions are orthonormal under the grid quadrature and signed so
    that their largest-magnitude coordinate is positive.
    """
    grid = surface.grid
    size = grid.size
    j = size if n_components is None else int(n_components)
    if not 1 <= j <= size:
        raise ParameterError(f"number of components must be in [1, {size}]")
    m = surface.values
    scale = max(1.0, float(np.max(np.abs(m))))
    if surface.asymmetry() > SYMMETRY_TOL * scale:
        raise ContractError("covariance surface is not symmetric")
    sw = np.sqrt(grid.weights)
    sym = sw[:, None] * ((m + m.T) / 2) * sw[None, :]
    vals, vecs = np.linalg.eigh(sym)
    order = np.argsort(vals)[::-1][:j]
    vals = vals[order]
    funcs = (vecs[:, order] / sw[:, None]).T
    peak = np.argmax(np.abs(funcs), axis=1)
    signs = np.sign(funcs[np.arange(j), peak])
    signs[signs == 0] = 1.0
    funcs = funcs * signs[:, None]
    degenerate = not np.max(np.abs(m)) > 0
    if degenerate:
        vals = np.zeros_like(vals)
    return EigenSystem(grid, vals, funcs, degenerate)


def extract_scores(fs: FunctionalSeries, eigensys: EigenSystem, j: int = 1) -> ScoreSeries:
    """Projections of the centred curves onto eigenfunction ``j`` (1-based)."""
    if eigensys.grid != fs.grid:
        raise ContractError("eigenfunctions and curves live on different grids")
    if not 1 <= j <= eigensys.eigenfunctions.shape[0]:
        raise ParameterError(f"component {j} not available")
    if eigensys.degenerate:
        raise DegenerateSeriesError("covariance operator is zero; scores are undefined")
    phi = eigensys.eigenfunctions[j - 1]
    return ScoreSeries(_centered(fs) @ (fs.grid.weights * phi), j)


LRC_METHODS = ("lag_weighted", "kernel_plugin")


def dynamic_scores(fs: FunctionalSeries, lrc: str = "lag_weighted", component: int = 1):
    """Curves -> long-run covariance -> eigenfunction -> score series.

    Returns ``(scores, info)`` where ``info`` records the long-run covariance
    method and, for the kernel route, the plug-in bandwidth.
    """
    info = {"lrc": lrc}
    if lrc == "lag_weighted":
        surface = lrc_lag_weighted(fs)
    elif lrc == "kernel_plugin":
        c0, h1 = plugin_constant(fs)
        h = c0 * fs.n ** (1 / 3)
        info.update(h_opt=h, h1=h1, c0=c0, initial_kernel="flat_top", final_kernel="bartlett")
        surface = lrc_kernel(fs, "bartlett", h)
    else:
        raise ParameterError(f"unknown long-run covariance method {lrc!r}; choose from {LRC_METHODS}")
    eig = eigendecompose(surface, component)
    info["eigenvalue"] = float(eig.eigenvalues[component - 1])
    return extract_scores(fs, eig, component), info


# ---------------------------------------------------------------------------
# CSV curve panels


def read_curve_csv(path) -> FunctionalSeries:
    """Read a curve panel: header row of grid points, one curve per row."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 3:
        raise ContractError(f"{path}: need a header and at least two curves")
    try:
        header = np.array([float(c) for c in rows[0]])
    except ValueError as exc:
        raise ContractError(f"{path}: header must hold numeric grid points ({exc})") from None
    width = header.size
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ContractError(f"{path}:{lineno}: expected {width} fields, found {len(row)}")
        try:
            values.append([float(c) for c in row])
        except ValueError as exc:
            raise ContractError(f"{path}:{lineno}: {exc}") from None
    grid = Grid.uniform(width)
    if not np.allclose(header, grid.points, rtol=0, atol=1e-9):
        raise ContractError(f"{path}: grid points must be equally spaced over [0, 1]")
    return FunctionalSeries(grid, np.array(values))


def write_curve_csv(fs: FunctionalSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([repr(float(p)) for p in fs.grid.points])
        for row in fs.values:
            writer.writerow([repr(float(v)) for v in row])
