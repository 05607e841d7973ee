"""Periodogram-regression and wavelet estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EstimationError, ParameterError
from ..fts import _parzen
from .base import HurstEstimate, RegressionPoints, as_array, fit_points, safe_log10


@dataclass(frozen=True)
class Periodogram:
    freqs: np.ndarray
    ordinates: np.ndarray

    def __len__(self):
        return self.freqs.size


def fourier_frequencies(n: int, count: int) -> np.ndarray:
    return 2 * np.pi * np.arange(1, count + 1) / n


def periodogram_ordinates(x: np.ndarray, count: int | None = None) -> np.ndarray:
    """``|sum_t x_t exp(i t lambda_j)|^2 / (2 pi n)`` for ``j = 1..count``."""
    n = x.size
    if count is None:
        count = (n - 1) // 2
    coef = np.fft.fft(x)[1 : count + 1]
    return (coef.real**2 + coef.imag**2) / (2 * np.pi * n)


def periodogram(beta) -> Periodogram:
    """Raw (uncentred) periodogram at the positive harmonic frequencies."""
    x = as_array(beta)
    if x.size < 4:
        raise ParameterError("periodogram needs at least four observations")
    count = (x.size - 1) // 2
    return Periodogram(fourier_frequencies(x.size, count), periodogram_ordinates(x, count))


def _low_count(n_freq: int) -> int:
    return max(3, int(0.1 * n_freq))


def estimate_periodogram(beta, boxed: bool = False) -> HurstEstimate:
    """Log-periodogram regression over the lowest 10% of frequencies.

    The boxed variant keeps the lowest ``max(5, 2%)`` ordinates as they are,
    averages the rest of the low band inside 60 log-equidistant boxes and
    fits with Huber weights.
    """
    x = as_array(beta)
    if boxed and x.size < 100:
        raise ParameterError("boxed periodogram needs n >= 100")
    pg = periodogram(x)
    low = min(_low_count(len(pg)), len(pg))
    lam = pg.freqs[:low]
    ords = pg.ordinates[:low]
    method = "boxper" if boxed else "per"
    bw = {"n_low": low}
    if not boxed:
        reg = fit_points(np.log10(lam), safe_log10(ords))
    else:
        keep = min(max(5, int(0.02 * len(pg))), low)
        xs = list(np.log10(lam[:keep]))
        ys = list(safe_log10(ords[:keep]))
        rest_lam = lam[keep:]
        rest_ord = ords[keep:]
        n_boxes = 0
        if rest_lam.size:
            edges = np.geomspace(rest_lam[0], rest_lam[-1], 61)
            which = np.clip(np.searchsorted(edges, rest_lam, side="right") - 1, 0, 59)
            for b in np.unique(which):
                sel = which == b
                xs.append(float(np.mean(np.log10(rest_lam[sel]))))
                ys.append(float(safe_log10(np.mean(rest_ord[sel]))))
                n_boxes += 1
        reg = fit_points(xs, ys, robust=True)
        bw.update(raw_kept=keep, n_boxes=n_boxes)
    h = (1 - reg.slope) / 2
    return HurstEstimate(method, h, {"regression": reg}, bw)


def _gph_ratio(lam: np.ndarray, ords: np.ndarray):
    b = -2 * np.log10(lam)
    yb = np.log10(ords)
    bc = b - b.mean()
    return float(np.sum(bc * yb) / np.sum(bc**2))


def _usable(lam, ords, what):
    keep = ords > 0
    if keep.sum() < 3:
        raise EstimationError(f"{what}: fewer than three positive ordinates")
    return lam[keep], ords[keep], int((~keep).sum())


def gph(beta, J: int | None = None) -> HurstEstimate:
    """Log-periodogram least-squares estimate of d over the first J ordinates."""
    x = as_array(beta)
    n = x.size
    if J is None:
        J = int(math.isqrt(n))
    if not 3 <= J <= (n - 1) // 2:
        raise ParameterError(f"GPH bandwidth J={J} outside [3, (n-1)/2]")
    lam = fourier_frequencies(n, J)
    lam, ords, dropped = _usable(lam, periodogram_ordinates(x, J), "gph")
    d = _gph_ratio(lam, ords)
    reg = RegressionPoints(np.log10(lam), np.log10(ords), -2 * d, float("nan"), False, dropped)
    return HurstEstimate.from_d("gph", d, {"regression": reg}, {"J": J})


def parzen_window(u):
    """Parzen lag window: 1 - 6u^2 + 6|u|^3 on |u| <= 1/2, 2(1-|u|)^3 up to 1."""
    return _parzen(np.asarray(u, dtype=float))


def sample_autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Centred autocovariances R(0..max_lag) with divisor n."""
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1]
    return acov / n


def smoothed_periodogram(x: np.ndarray, lam: np.ndarray, h: int) -> np.ndarray:
    """Parzen lag-window spectral estimate at frequencies ``lam``."""
    r = sample_autocovariance(x, h)
    s = np.arange(1, h + 1)
    k = parzen_window(s / h)
    return (r[0] + 2 * np.cos(np.outer(lam, s)) @ (k * r[1:])) / (2 * np.pi)


def smoothed_gph(beta, J: int | None = None, h: int | None = None) -> HurstEstimate:
    """GPH regression on the Parzen-smoothed periodogram."""
    x = as_array(beta)
    n = x.size
    if J is None:
        J = int(math.isqrt(n))
    if h is None:
        h = int(n**0.9)
    if not 1 <= h <= n - 1:
        raise ParameterError(f"lag-window truncation h={h} outside [1, n-1]")
    if not 3 <= J <= (n - 1) // 2:
        raise ParameterError(f"bandwidth J={J} outside [3, (n-1)/2]")
    lam = fourier_frequencies(n, J)
    lam, ords, dropped = _usable(lam, smoothed_periodogram(x, lam, h), "sgph")
    d = _gph_ratio(lam, ords)
    reg = RegressionPoints(np.log10(lam), np.log10(ords), -2 * d, float("nan"), False, dropped)
    return HurstEstimate.from_d("sgph", d, {"regression": reg}, {"J": J, "h": h})


# ---------------------------------------------------------------------------
# Wavelets

_S3 = math.sqrt(3.0)
D4_LOWPASS = np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * math.sqrt(2.0))
D4_HIGHPASS = np.array([(-1) ** k * D4_LOWPASS[3 - k] for k in range(4)])


def dwt_step(a: np.ndarray):
    """One periodic analysis step: ``(approximation, detail)``."""
    size = a.size
    idx = (2 * np.arange(size // 2)[:, None] + np.arange(4)[None, :]) % size
    windows = a[idx]
    return windows @ D4_LOWPASS, windows @ D4_HIGHPASS


def dwt(x, levels: int | None = None):
    """Periodic Daubechies-4 pyramid on a power-of-two length series.

    Returns ``(approximation, details)`` with ``details[0]`` the finest level.
    """
    a = np.asarray(x, dtype=float)
    size = a.size
    if size < 2 or size & (size - 1):
        raise ParameterError("DWT length must be a power of two")
    max_levels = size.bit_length() - 1
    levels = max_levels if levels is None else int(levels)
    details = []
    for _ in range(levels):
        a, w = dwt_step(a)
        details.append(w)
    return a, details


def wavelet_estimate(beta, min_coeffs: int = 8) -> HurstEstimate:
    """Regression of log10 detail variance on log10 2^(2j).

    Scale ``j`` carries ``2**j`` coefficients (coarse to fine); only scales
    with at least ``min_coeffs`` coefficients enter the fit.
    """
    x = as_array(beta)
    if x.size < 64:
        raise EstimationError("wavelet estimator needs at least 64 observations")
    total = 1 << (x.size.bit_length() - 1)
    _, details = dwt(x[:total])
    scales, variances = [], []
    for w in details:
        j = int(np.log2(w.size))
        if w.size >= min_coeffs:
            scales.append(j)
            variances.append(float(np.mean(w**2)))
    scales = np.array(scales)
    reg = fit_points(2 * scales * np.log10(2.0), safe_log10(variances))
    return HurstEstimate.from_d(
        "wavelet",
        -reg.slope,
        {"regression": reg, "scale_j": scales.tolist(), "scale_note": "j = log2(#coefficients); finest level has j = log2(n)-1"},
        {"levels": scales.tolist(), "n_used": total},
    )
