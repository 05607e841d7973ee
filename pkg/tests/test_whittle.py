import cmath
import math

import numpy as np
import pytest

from conftest import arfima0d0
from fhurst.errors import ParameterError
from fhurst.hurst.spectral import fourier_frequencies, periodogram_ordinates
from fhurst.hurst.whittle import (
    WhittleOptions,
    exact_local_whittle,
    exact_profile_objective,
    exact_whittle_Q,
    frac_diff,
    hou_perron_objective,
    local_whittle,
    local_whittle_modified,
    local_whittle_tapered,
    lw_profile_objective,
    tapered_frequency_index,
    tapered_ordinates,
    two_step_elw,
    whittle_Q,
    whittle_Qp,
    zk_taper,
)
from fhurst.sim import ma_coeffs_fracint


def dft_ordinate(x, j, taper=None):
    n = len(x)
    lam = 2 * math.pi * j / n
    h = [1.0] * n if taper is None else taper
    s = sum(h[t - 1] * x[t - 1] * cmath.exp(1j * t * lam) for t in range(1, n + 1))
    return abs(s) ** 2 / (2 * math.pi * sum(v * v for v in h))


def q_oracle(g, d, x, idx):
    n = len(x)
    total = 0.0
    for j in idx:
        lam = 2 * math.pi * j / n
        f = g * lam ** (-2 * d)
        total += math.log(f) + dft_ordinate(x, j) / f
    return total / len(idx)


@pytest.fixture
def x64():
    return np.random.default_rng(64).standard_normal(64).cumsum() * 0.3 + np.random.default_rng(65).standard_normal(64)


PARAMS = [(0.5, -0.3), (1.7, 0.1), (0.2, 0.45), (3.0, -0.49), (1.0, 0.0)]


# --- objective oracles -------------------------------------------------------------


@pytest.mark.parametrize("g,d", PARAMS)
def test_Q_term_by_term(x64, g, d):
    m = 12
    lam = fourier_frequencies(64, m)
    ords = periodogram_ordinates(x64, m)
    assert abs(whittle_Q(g, d, lam, ords) - q_oracle(g, d, x64, range(1, m + 1))) < 1e-12


@pytest.mark.parametrize("d", [p[1] for p in PARAMS])
def test_profile_term_by_term(x64, d):
    m = 12
    lam = fourier_frequencies(64, m)
    ords = periodogram_ordinates(x64, m)
    g = sum((2 * math.pi * j / 64) ** (2 * d) * dft_ordinate(x64, j) for j in range(1, m + 1)) / m
    mean_log = sum(math.log(2 * math.pi * j / 64) for j in range(1, m + 1)) / m
    assert abs(lw_profile_objective(d, lam, ords) - (math.log(g) - 2 * d * mean_log)) < 1e-12


def triangle_taper(n):
    # order-2 Zhurbenko taper written out: box of length L convolved with itself
    length = n // 2
    h = [0.0] * n
    for t in range(2 * length - 1):
        h[t] = float(min(t + 1, 2 * length - 1 - t))
    return h


def test_zk_taper_order2_closed_form():
    for n in (10, 11, 64):
        np.testing.assert_array_equal(zk_taper(n, 2), triangle_taper(n))
    np.testing.assert_array_equal(zk_taper(9, 1), np.ones(9))


@pytest.mark.parametrize("g,d", PARAMS)
def test_Qp_term_by_term(x64, g, d):
    p, m = 2, 12
    idx = tapered_frequency_index(m, p)
    taper = triangle_taper(64)
    lam = 2 * np.pi * idx / 64
    ords = tapered_ordinates(x64, p, m)[idx - 1]
    oracle = 0.0
    for j in idx:
        f = g * (2 * math.pi * j / 64) ** (-2 * d)
        oracle += math.log(f) + dft_ordinate(x64, j, taper) / f
    oracle *= p / m
    assert abs(whittle_Qp(g, d, lam, ords) - oracle) < 1e-12


@pytest.mark.parametrize("d,theta", [(0.0, 0.0), (0.1, 2.0), (0.3, 0.05), (0.45, 64.0), (0.25, 7.5)])
def test_hou_perron_term_by_term(x64, d, theta):
    m, n = 12, 64
    lam = fourier_frequencies(n, m)
    ords = periodogram_ordinates(x64, m)
    gs = [(2 * math.pi * j / n) ** (-2 * d) + theta * (2 * math.pi * j / n) ** -2 / n for j in range(1, m + 1)]
    ratio = sum(dft_ordinate(x64, j) / gj for j, gj in zip(range(1, m + 1), gs)) / m
    oracle = math.log(ratio) + sum(math.log(gj) for gj in gs) / m
    assert abs(hou_perron_objective(d, theta, lam, ords, n) - oracle) < 1e-12


def test_hou_perron_theta_zero_is_lw_profile(x64):
    lam = fourier_frequencies(64, 12)
    ords = periodogram_ordinates(x64, 12)
    for d in np.linspace(0, 0.5, 7):
        assert abs(hou_perron_objective(d, 0.0, lam, ords, 64) - lw_profile_objective(d, lam, ords)) < 1e-12


def frac_diff_loop(x, d):
    n = len(x)
    c = [1.0]
    for k in range(1, n):
        c.append(c[-1] * (k - 1 - d) / k)
    return [sum(c[k] * x[t - k] for k in range(t + 1)) for t in range(n)]


@pytest.mark.parametrize("g,d", PARAMS + [(0.8, 0.9)])
def test_exact_Q_term_by_term(x64, g, d):
    m = 12
    y = frac_diff_loop(list(x64), d)
    oracle = 0.0
    for j in range(1, m + 1):
        f = g * (2 * math.pi * j / 64) ** (-2 * d)
        oracle += math.log(f) + dft_ordinate(y, j) / f
    oracle /= m
    assert abs(exact_whittle_Q(g, d, x64, m) - oracle) < 1e-12


@pytest.mark.parametrize("d", [-0.4, 0.0, 0.35, 0.8])
def test_exact_profile_pipeline(x64, d):
    m = 12
    y = frac_diff_loop(list(x64), d)
    g = sum(dft_ordinate(y, j) for j in range(1, m + 1)) / m
    mean_log = sum(math.log(2 * math.pi * j / 64) for j in range(1, m + 1)) / m
    assert abs(exact_profile_objective(x64, d, m) - (math.log(g) - 2 * d * mean_log)) < 1e-12


def test_exact_profile_at_zero_is_plain(x64):
    lam = fourier_frequencies(64, 12)
    ords = periodogram_ordinates(x64, 12)
    assert abs(exact_profile_objective(x64, 0.0, 12) - lw_profile_objective(0.0, lam, ords)) < 1e-12


# --- fractional differencing ---------------------------------------------------------


def test_frac_diff_identity_and_first_difference(rng):
    x = rng.standard_normal(50)
    np.testing.assert_array_equal(frac_diff(x, 0.0), x)
    y = frac_diff(x, 1.0)
    assert y[0] == x[0]
    np.testing.assert_allclose(y[1:], np.diff(x), atol=1e-14)


def test_frac_diff_matches_loop(rng):
    x = rng.standard_normal(300)
    np.testing.assert_allclose(frac_diff(x, 0.37), frac_diff_loop(list(x), 0.37), atol=1e-12)


def test_frac_diff_inverts_frac_int(rng):
    n, d = 500, 0.3
    x = rng.standard_normal(n)
    b = ma_coeffs_fracint(d, n - 1).coeffs
    integrated = np.array([sum(b[i] * x[t - i] for i in range(t + 1)) for t in range(n)])
    back = frac_diff(integrated, d)
    assert np.max(np.abs(back[50:] - x[50:])) < 1e-8


# --- plain local Whittle ------------------------------------------------------------


def test_lw_white_noise_clt():
    n = 4096
    m = int(n**0.65)
    d = np.array([local_whittle(np.random.default_rng(s).standard_normal(n)).d for s in range(200)])
    assert abs(d.mean()) <= 0.05
    assert 0.5 / (4 * m) <= d.var(ddof=1) <= 2 / (4 * m)


def test_lw_scaling(rng):
    x = arfima0d0(0.2, 1000, rng)
    a, b = local_whittle(x), local_whittle(5.0 * x)
    assert abs(a.d - b.d) < 1e-10
    assert abs(b.diagnostics["G_hat"] / a.diagnostics["G_hat"] - 25.0) < 1e-8


def test_lw_options_validation():
    x = np.random.default_rng(0).standard_normal(100)
    with pytest.raises(ParameterError):
        local_whittle(x, m=50)
    with pytest.raises(ParameterError):
        local_whittle(x, bounds=(-0.6, 0.4))
    with pytest.raises(ParameterError):
        local_whittle(x, bounds=(0.3, 0.1))
    assert WhittleOptions().resolve(1000).m == int(1000**0.65)


def test_lw_boundary_flag():
    x = np.arange(500.0) + np.random.default_rng(1).standard_normal(500)
    est = local_whittle(x)
    assert est.diagnostics["boundary"]
    assert abs(est.d - 0.49) < 1e-7


def audit(objective, est, lo, hi):
    grid = np.arange(lo, hi + 1e-12, 1e-3)
    best = min(objective(d) for d in grid)
    return objective(est.d) <= best + 1e-9


def test_optimizer_soundness():
    for s in range(5):
        x = arfima0d0(0.25, 512, np.random.default_rng(s))
        m = int(512**0.65)
        lam = fourier_frequencies(512, m)
        ords = periodogram_ordinates(x, m)
        assert audit(lambda d: lw_profile_objective(d, lam, ords), local_whittle(x), -0.49, 0.49)
        assert audit(lambda d: exact_profile_objective(x, d, m), exact_local_whittle(x), -0.5, 1.0)
        xc = x - x.mean()
        assert audit(lambda d: exact_profile_objective(xc, d, m), two_step_elw(x), -0.5, 1.0)
        est = local_whittle_tapered(x)
        idx = tapered_frequency_index(est.bandwidths["m"], 2)
        tl = 2 * np.pi * idx / 512
        to = tapered_ordinates(x, 2, est.bandwidths["m"])[idx - 1]
        assert audit(lambda d: lw_profile_objective(d, tl, to), est, -0.49, 1.49)


def test_modified_optimizer_soundness():
    for s in range(3):
        x = arfima0d0(0.2, 512, np.random.default_rng(s))
        est = local_whittle_modified(x)
        m = est.bandwidths["m"]
        lam = fourier_frequencies(512, m)
        ords = periodogram_ordinates(x, m)
        value = est.diagnostics["objective"]
        ds = np.arange(0, 0.5 + 1e-12, 1e-2)
        ts = np.concatenate([[0.0], np.geomspace(1e-4, 512, 60)])
        best = min(hou_perron_objective(d, t, lam, ords, 512) for d in ds for t in ts)
        assert value <= best + 1e-9


# --- tapered ------------------------------------------------------------------------


def test_tapered_p1_is_plain(rng):
    for n in (100, 257, 1000):
        x = arfima0d0(0.2, n, rng)
        a = local_whittle(x)
        b = local_whittle_tapered(x, p=1)
        assert abs(a.d - b.d) < 1e-12


def test_thinned_frequency_set():
    np.testing.assert_array_equal(tapered_frequency_index(12, 3), [3, 6, 9, 12])
    est = local_whittle_tapered(np.random.default_rng(0).standard_normal(128), p=3, m=12)
    assert est.diagnostics["frequency_index"] == [3, 6, 9, 12]
    assert est.bandwidths["n_used"] == 126


def test_tapered_requires_divisible_m():
    with pytest.raises(ParameterError):
        local_whittle_tapered(np.random.default_rng(0).standard_normal(128), p=3, m=13)


def test_tapered_robust_to_trend():
    wins = 0
    for s in range(100):
        x = arfima0d0(0.3, 2048, np.random.default_rng(s)) + 0.002 * np.arange(2048)
        plain = abs(local_whittle(x).d - 0.3)
        tapered = abs(local_whittle_tapered(x).d - 0.3)
        wins += tapered <= plain
    assert wins >= 60


# --- modified (Hou-Perron) ---------------------------------------------------------


def test_modified_absorbs_level_shift():
    plain, modified = [], []
    for s in range(100):
        x = np.random.default_rng(s).standard_normal(2048)
        x[1024:] += 1.0
        plain.append(local_whittle(x).d)
        modified.append(local_whittle_modified(x).d)
    assert np.mean(modified) < np.mean(plain)


def test_modified_white_noise():
    d = [local_whittle_modified(np.random.default_rng(s).standard_normal(1024)).d for s in range(100)]
    assert 0.0 <= np.mean(d) <= 0.1


# --- exact and two-step -----------------------------------------------------------


def test_elw_long_memory():
    d = [exact_local_whittle(arfima0d0(0.4, 2048, np.random.default_rng(s))).d for s in range(100)]
    assert 0.3 <= np.mean(d) <= 0.5


def test_two_step_zero_mean_and_shift(rng):
    x = arfima0d0(0.3, 700, rng)
    x = x - x.mean()
    a = exact_local_whittle(x)
    b = two_step_elw(x)
    assert abs(a.d - b.d) < 1e-12
    c = two_step_elw(x + 100.0)
    assert abs(c.d - b.d) < 1e-10
    assert "(-1/2, 1)" in c.diagnostics["valid_range"]


def test_two_step_with_mean():
    d = [two_step_elw(arfima0d0(0.3, 2048, np.random.default_rng(s)) + 5.0).d for s in range(100)]
    assert 0.2 <= np.mean(d) <= 0.4
