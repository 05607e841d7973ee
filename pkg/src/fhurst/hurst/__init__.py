"""Hurst exponent / memory parameter estimators for univariate score series.

Every estimator is reachable through :func:`estimate` by a stable string id::

    >>> from fhurst.hurst import estimate
    >>> est = estimate(scores, "lw")
    >>> est.H, est.d
"""

from functools import partial

from ..errors import ParameterError
from .base import HurstEstimate, RegressionPoints, block_grid, fit_points, log_log_fit
from .spectral import (
    Periodogram,
    dwt,
    estimate_periodogram,
    gph,
    parzen_window,
    periodogram,
    smoothed_gph,
    wavelet_estimate,
)
from .timedomain import (
    SLOPE_TO_H,
    abs_moment,
    adjusted_rescaled_range,
    agg_var,
    dfa_fluctuation,
    diff_var,
    estimate_time_domain,
    higuchi_length,
    rescaled_adjusted_range,
    rs_simple,
)
from .whittle import (
    WhittleOptions,
    exact_local_whittle,
    frac_diff,
    local_whittle,
    local_whittle_modified,
    local_whittle_tapered,
    two_step_elw,
)

ESTIMATORS = {
    "aggvar": partial(estimate_time_domain, method="aggvar"),
    "diffvar": partial(estimate_time_domain, method="diffvar"),
    "absval": partial(estimate_time_domain, method="absval"),
    "higuchi": partial(estimate_time_domain, method="higuchi"),
    "peng": partial(estimate_time_domain, method="peng"),
    "rs": rs_simple,
    "rar": rescaled_adjusted_range,
    "per": partial(estimate_periodogram, boxed=False),
    "boxper": partial(estimate_periodogram, boxed=True),
    "gph": gph,
    "sgph": smoothed_gph,
    "wavelet": wavelet_estimate,
    "lw": local_whittle,
    "lwt": local_whittle_tapered,
    "lwm": local_whittle_modified,
    "elw": exact_local_whittle,
    "elw2": two_step_elw,
}

DESCRIPTIONS = {
    "aggvar": "aggregated variance",
    "diffvar": "differenced aggregated variance",
    "absval": "absolute moment of aggregated series",
    "higuchi": "Higuchi curve length",
    "peng": "detrended fluctuation analysis (Peng)",
    "rs": "rescaled range, single point",
    "rar": "rescaled adjusted range regression",
    "per": "log-periodogram regression, lowest 10%",
    "boxper": "boxed log-periodogram, robust fit",
    "gph": "Geweke-Porter-Hudak",
    "sgph": "GPH on Parzen-smoothed periodogram",
    "wavelet": "Daubechies-4 wavelet variance",
    "lw": "local Whittle",
    "lwt": "tapered local Whittle (Velasco)",
    "lwm": "modified local Whittle (Hou-Perron)",
    "elw": "exact local Whittle",
    "elw2": "two-step exact local Whittle (demeaned)",
}


def resolve_ids(ids) -> list:
    """Expand ``"all"`` and validate estimator ids, preserving order."""
    if isinstance(ids, str):
        ids = [s.strip() for s in ids.split(",") if s.strip()]
    out = []
    for i in ids:
        if i == "all":
            out.extend(k for k in ESTIMATORS if k not in out)
        elif i in ESTIMATORS:
            if i not in out:
                out.append(i)
        else:
            raise ParameterError(f"unknown estimator {i!r}; valid ids: {', '.join(ESTIMATORS)}")
    if not out:
        raise ParameterError("no estimators requested")
    return out


def estimate(beta, method: str, **options) -> HurstEstimate:
    """Run estimator ``method`` on a score series."""
    try:
        fn = ESTIMATORS[method]
    except KeyError:
        raise ParameterError(f"unknown estimator {method!r}; valid ids: {', '.join(ESTIMATORS)}") from None
    return fn(beta, **options)


__all__ = [
    "ESTIMATORS",
    "DESCRIPTIONS",
    "HurstEstimate",
    "Periodogram",
    "RegressionPoints",
    "SLOPE_TO_H",
    "WhittleOptions",
    "abs_moment",
    "adjusted_rescaled_range",
    "agg_var",
    "block_grid",
    "dfa_fluctuation",
    "diff_var",
    "dwt",
    "estimate",
    "estimate_periodogram",
    "estimate_time_domain",
    "exact_local_whittle",
    "fit_points",
    "frac_diff",
    "gph",
    "higuchi_length",
    "local_whittle",
    "local_whittle_modified",
    "local_whittle_tapered",
    "log_log_fit",
    "parzen_window",
    "periodogram",
    "rescaled_adjusted_range",
    "resolve_ids",
    "rs_simple",
    "smoothed_gph",
    "two_step_elw",
    "wavelet_estimate",
]
