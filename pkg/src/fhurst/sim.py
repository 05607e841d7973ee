"""Functional ARFIMA(p, d, q) simulation with Brownian-motion innovations.

The ARMA part is generated by direct recursion from zero initial curves,
then fractionally integrated with the exact MA(infinity) coefficients of
``(1 - B)^(-d)`` truncated at ``ma_truncation`` lags.  Random numbers come
from numpy's PCG64 generator seeded through ``SeedSequence``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import ContractError, ParameterError
from .fts import FunctionalSeries, Grid

AR_COEFFICIENTS = {"weak": 0.068, "moderate": 0.34, "strong": 0.612}
MA_COEFFICIENTS = {"weak": 0.059, "moderate": 1.5, "strong": 4.765}
STRENGTHS = tuple(AR_COEFFICIENTS)
DEFAULT_GRID_POINTS = 101


@dataclass(frozen=True)
class OperatorKernel:
    """Kernel ``k(u, v)`` of an integral operator sampled on ``grid``."""

    grid: Grid
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size, self.grid.size) or not np.all(np.isfinite(values)):
            raise ContractError("kernel values must be a finite W x W matrix")
        object.__setattr__(self, "values", values)

    @property
    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.surface_norm2(self.values)))

    def matrix(self) -> np.ndarray:
        """Matrix ``A`` with ``A @ x`` equal to the quadrature integral."""
        return self.values * self.grid.weights[None, :]


@dataclass(frozen=True)
class FracCoeffs:
    d: float
    coeffs: np.ndarray


def ma_coeffs_fracint(d: float, N: int) -> FracCoeffs:
    """MA(infinity) weights of ``(1 - B)^(-d)``: b_0 = 1, b_i = b_{i-1} (i-1+d)/i."""
    if not abs(d) < 0.5:
        raise ParameterError(f"d={d} outside (-1/2, 1/2)")
    if N < 1:
        raise ParameterError("truncation N must be at least 1")
    b = np.empty(N + 1)
    b[0] = 1.0
    for i in range(1, N + 1):
        b[i] = b[i - 1] * (i - 1 + d) / i
    return FracCoeffs(float(d), b)


def brownian_curves(grid: Grid, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent standard Brownian paths evaluated on the grid."""
    steps = np.diff(np.concatenate([[0.0], grid.points]))
    z = rng.standard_normal((size, grid.size))
    return np.cumsum(z * np.sqrt(steps), axis=1)


def brownian_curve(grid: Grid, rng: np.random.Generator) -> np.ndarray:
    return brownian_curves(grid, rng, 1)[0]


def apply_operator(kernel: OperatorKernel, x: np.ndarray) -> np.ndarray:
    """Quadrature approximation of ``u -> int k(u, v) x(v) dv``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != kernel.grid.size:
        raise ContractError("curve and kernel live on different grids")
    return x @ kernel.matrix().T


def make_case_kernel(case: str, strength: str, grid: Grid) -> OperatorKernel:
    """Gaussian AR kernel ``c exp(-(u^2+v^2)/2)`` or MA kernel ``c min(u, v)``."""
    if strength not in AR_COEFFICIENTS:
        raise ParameterError(f"unknown strength {strength!r}; choose from {STRENGTHS}")
    u = grid.points[:, None]
    v = grid.points[None, :]
    if case == "ar_case":
        c = AR_COEFFICIENTS[strength]
        values = c * np.exp(-(u**2 + v**2) / 2)
    elif case == "ma_case":
        c = MA_COEFFICIENTS[strength]
        values = c * np.minimum(u, v)
    else:
        raise ParameterError(f"unknown kernel case {case!r}; choose 'ar_case' or 'ma_case'")
    return OperatorKernel(grid, values, f"{case}:{strength}")


@dataclass(frozen=True)
class FarimaSpec:
    """Functional ARFIMA model and simulation knobs.

    ``burn_in`` defaults to ``n`` and ``ma_truncation`` to ``n + 100`` when
    left as ``None``.  ``model`` is a free-form tag for serialisation.
    """

    d: float
    grid: Grid
    ar_kernels: tuple = ()
    ma_kernels: tuple = ()
    burn_in: int | None = None
    ma_truncation: int | None = None
    seed: int = 0
    model: dict = field(default_factory=dict)

    def __post_init__(self):
        if not abs(self.d) < 0.5:
            raise ParameterError(f"d={self.d} outside (-1/2, 1/2)")
        for k in (*self.ar_kernels, *self.ma_kernels):
            if k.grid != self.grid:
                raise ContractError("kernel grid differs from the model grid")
        object.__setattr__(self, "ar_kernels", tuple(self.ar_kernels))
        object.__setattr__(self, "ma_kernels", tuple(self.ma_kernels))

    @property
    def p(self) -> int:
        return len(self.ar_kernels)

    @property
    def q(self) -> int:
        return len(self.ma_kernels)

    def resolved(self, n: int):
        burn = n if self.burn_in is None else int(self.burn_in)
        trunc = n + 100 if self.ma_truncation is None else int(self.ma_truncation)
        return burn, trunc

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "d": self.d,
            "p": self.p,
            "q": self.q,
            "grid_points": self.grid.size,
            "ar_kernels": [k.name for k in self.ar_kernels],
            "ma_kernels": [k.name for k in self.ma_kernels],
            "ar_l2_norms": [k.l2_norm for k in self.ar_kernels],
            "ma_l2_norms": [k.l2_norm for k in self.ma_kernels],
            "burn_in": self.burn_in,
            "ma_truncation": self.ma_truncation,
            "seed": self.seed,
            "rng": "numpy PCG64 via default_rng(seed); Gaussian draws by standard_normal",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def case_spec(case: int, strength: str, d: float, grid: Grid | None = None, seed: int = 0, **knobs) -> FarimaSpec:
    """Case 1: ARFIMA(1, d, 0) with the Gaussian AR kernel.
    Case 2: ARFIMA(1, d, 1) adding the ``min(u, v)`` MA kernel."""
    if grid is None:
        grid = Grid.uniform(DEFAULT_GRID_POINTS)
    if case not in (1, 2):
        raise ParameterError(f"case must be 1 or 2, got {case!r}")
    ar = (make_case_kernel("ar_case", strength, grid),)
    ma = (make_case_kernel("ma_case", strength, grid),) if case == 2 else ()
    return FarimaSpec(d, grid, ar, ma, seed=seed, model={"case": case, "strength": strength}, **knobs)


def arma_recursion(eta: np.ndarray, ar_mats, ma_mats) -> np.ndarray:
    """``Y_t = sum_i A_i Y_{t-i} + eta_t + sum_i B_i eta_{t-i}``, zero start."""
    y = eta.copy()
    for i, b in enumerate(ma_mats, start=1):
        y[i:] += eta[:-i] @ b.T
    if not ar_mats:
        return y
    total = y.shape[0]
    for t in range(total):
        acc = y[t]
        for i, a in enumerate(ar_mats, start=1):
            if t - i >= 0:
                acc = acc + a @ y[t - i]
        y[t] = acc
    return y


def simulate_farima(spec: FarimaSpec, n: int, rng: np.random.Generator | None = None) -> FunctionalSeries:
    """Simulate ``n`` curves from the functional ARFIMA model.

    Draws ``burn_in + n + ma_truncation`` innovation curves, runs the ARMA
    recursion, fractionally integrates with ``ma_truncation`` lags and keeps
    the final ``n`` curves.  Deterministic given ``spec.seed`` (or ``rng``).
    """
    if n < 10:
        raise ParameterError("need n >= 10 curves")
    burn, trunc = spec.resolved(n)
    if burn < 0 or trunc < 0:
        raise ParameterError("burn-in and truncation must be non-negative")
    for k in spec.ar_kernels:
        if k.l2_norm >= 1:
            warnings.warn(f"AR kernel {k.name} has L2 norm {k.l2_norm:.3f} >= 1; the recursion may be unstable", RuntimeWarning)
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    total = burn + n + trunc
    eta = brownian_curves(spec.grid, rng, total)
    y = arma_recursion(eta, [k.matrix() for k in spec.ar_kernels], [k.matrix() for k in spec.ma_kernels])
    if spec.d == 0:
        x = y[total - n :]
    else:
        b = ma_coeffs_fracint(spec.d, trunc).coeffs
        # only the last n rows are needed: they see exactly trunc + 1 lags
        x = fftconvolve(y[total - n - trunc :], b[:, None], mode="valid", axes=0)
    return FunctionalSeries(spec.grid, x)
