"""
nonparametric estimation of the scale ratio, unit and system distributions,
and the mean system lifetime from hot and warm test data
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple
from warnings import warn as warning
import numpy as np
import pandas as pd

from .stepfn import StepFn, from_masses, squeeze_output

__all__ = [
    "HotSample",
    "WarmSample",
    "EstimationResult",
    "counting_processes",
    "nelson_aalen_tilde",
    "u_score",
    "estimate_r",
    "cum_hazard_and_cdf",
    "khat_next",
    "khat_plugin",
    "khat_curve",
    "mean_from_cdf",
    "estimate_all",
]

# tolerance for deciding whether an estimated CDF reaches one
_ONE_TOL = 1e-9
# number of evaluation times processed per block in the K recurrences
_CHUNK = 256
# relative distance below which a mapped warm time is a tie with a hot time
_TIE_RTOL = 1e-12


def _as_times(times, name: str) -> np.ndarray:
    times = np.sort(np.asarray(times, dtype=float).ravel())
    if times.size > 0 and (not np.all(np.isfinite(times)) or times[0] <= 0):
        msg = f"{name} failure times must be positive and finite"
        raise ValueError(msg)
    return times


@dataclass(frozen=True)
class HotSample(object):
    """
    Complete sample of failure times observed in hot conditions.

    Examples
    --------
    >>> HotSample([2.0, 1.0]).times
    array([1., 2.])
    """

    times: np.ndarray

    def __post_init__(self):
        times = _as_times(self.times, "hot")
        if times.size == 0:
            msg = "the hot sample must contain at least one failure time"
            raise ValueError(msg)
        object.__setattr__(self, "times", times)

    @property
    def n1(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class WarmSample(object):
    """
    Failure times of `n2` units tested in warm conditions up to time `t1`.

    Parameters
    ----------
    times : array_like
        observed failure times, all <= t1

    n2 : int, optional
        number of units on test, defaults to the number of observed times

    t1 : float
        censoring time, inf for a complete sample
    """

    times: np.ndarray
    n2: Optional[int] = None
    t1: float = math.inf

    def __post_init__(self):
        times = _as_times(self.times, "warm")
        object.__setattr__(self, "times", times)
        n2 = times.size if self.n2 is None else int(self.n2)
        object.__setattr__(self, "n2", n2)
        t1 = float(self.t1)
        object.__setattr__(self, "t1", t1)

        if not t1 > 0:
            msg = f"the censoring time t1 must be positive, got {t1}"
            raise ValueError(msg)
        if n2 < times.size:
            msg = f"n2={n2} is smaller than the {times.size} observed failures"
            raise ValueError(msg)
        if times.size > 0 and times[-1] > t1:
            msg = f"observed failure {times[-1]} is after the censoring time {t1}"
            raise ValueError(msg)
        if math.isinf(t1) and n2 != times.size:
            msg = (
                f"a sample observed until t1=inf is complete, but n2={n2} and "
                f"only {times.size} failures were given"
            )
            raise ValueError(msg)

    @property
    def m2(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class EstimationResult(object):
    """
    Output of ``estimate_all``.

    `k_hat` holds K_1, ..., K_m (K_1 is the unit distribution F1). `r_hat` is
    nan and `f2_hat_cdf` None when the warm sample has no failures.
    """

    r_hat: float
    lambda1_hat: StepFn
    f1_hat_cdf: StepFn
    f2_hat_cdf: Optional[StepFn]
    k_hat: Tuple[StepFn, ...]
    mu_hat: float
    pooled_times: np.ndarray
    mu_is_lower_bound: bool = False
    grid: np.ndarray = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return len(self.k_hat)

    @property
    def lambda2_hat(self) -> Optional[StepFn]:
        if math.isnan(self.r_hat):
            return None
        return self.lambda1_hat.rescale(self.r_hat)

    def curves(self) -> pd.DataFrame:
        """
        Return the estimated curves on the evaluation grid.

        Columns are ``time``, ``F1``, ``F2`` (when available) and
        ``K2``, ..., ``Km``.
        """
        grid = self.grid if self.grid is not None else self.pooled_times
        data = {"time": grid, "F1": np.asarray(self.f1_hat_cdf(grid))}
        if self.f2_hat_cdf is not None:
            data["F2"] = np.asarray(self.f2_hat_cdf(grid))
        for j, k in enumerate(self.k_hat[1:], start=2):
            data[f"K{j}"] = np.asarray(k(grid))
        return pd.DataFrame(data)

    def to_dict(self) -> dict:
        return {
            "r_hat": None if math.isnan(self.r_hat) else self.r_hat,
            "mu_hat": self.mu_hat,
            "mu_is_lower_bound": self.mu_is_lower_bound,
            "m": self.m,
            "n_pooled": int(self.pooled_times.size),
        }


def _snap_to(values: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    replace each value within a relative _TIE_RTOL of a target by that target
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0 or targets.size == 0:
        return values
    idx = np.searchsorted(targets, values)
    below = targets[np.clip(idx - 1, 0, targets.size - 1)]
    above = targets[np.clip(idx, 0, targets.size - 1)]
    nearest = np.where(np.abs(values - below) <= np.abs(above - values), below, above)
    tied = np.isclose(values, nearest, rtol=_TIE_RTOL, atol=0.0)
    return np.where(tied, nearest, values)


def _warm_on_hot_scale(hot: HotSample, warm: WarmSample, r: float):
    """
    Return the warm failure times and censoring time mapped to r * T.

    Products that land within rounding of a hot failure time are set equal to
    it, so ratios r = T1j / T2i produce exact ties.
    """
    mapped = np.sort(_snap_to(r * warm.times, hot.times))
    t1 = float(_snap_to(np.array([r * warm.t1]), hot.times)[0])
    if mapped.size > 0:
        t1 = max(t1, mapped[-1])
    return mapped, t1


def _at_risk(hot: HotSample, warm: WarmSample, mapped: np.ndarray, t1: float, s):
    """
    Y1(s) and Y2(s / r) evaluated on the hot time scale
    """
    s = np.asarray(s, dtype=float)
    y1 = hot.n1 - np.searchsorted(hot.times, s, side="left")
    y2 = warm.n2 - np.searchsorted(mapped, s, side="left")
    return y1, np.where(s <= t1, y2, 0)


def counting_processes(
    hot: HotSample, warm: WarmSample
) -> Tuple[StepFn, StepFn, StepFn, StepFn]:
    """
    Return the counting and at-risk processes (N1, N2, Y1, Y2).

    N1 and N2 are right-continuous counts of observed failures. Y1 and Y2
    are left-continuous, Y(t) counts units with failure time >= t, and
    Y2(t) = 0 after the censoring time.

    Examples
    --------
    >>> N1, N2, Y1, Y2 = counting_processes(
    ...     HotSample([1.0, 2.0]), WarmSample([1.0], n2=3, t1=2.0))
    >>> N1(1.5), Y1(2.0), Y1(2.01)
    (1.0, 1.0, 0.0)
    >>> N2(3.0), Y2(2.0), Y2(2.5)
    (1.0, 2.0, 0.0)
    """
    n1 = from_masses(hot.times, np.ones(hot.n1))
    n2 = from_masses(warm.times, np.ones(warm.m2))

    hot_bp = np.unique(hot.times)
    y1 = StepFn(
        hot_bp,
        hot.n1 - np.searchsorted(hot.times, hot_bp, side="right"),
        value_before_first=hot.n1,
        right_continuous=False,
    )

    warm_bp = warm.times
    if math.isfinite(warm.t1):
        warm_bp = np.append(warm_bp, warm.t1)
    warm_bp = np.unique(warm_bp)
    warm_values = warm.n2 - np.searchsorted(warm.times, warm_bp, side="right")
    warm_values = np.where(warm_bp < warm.t1, warm_values, 0)
    y2 = StepFn(
        warm_bp,
        warm_values,
        value_before_first=warm.n2,
        right_continuous=False,
    )
    return n1, n2, y1, y2


def _hazard_jumps(hot: HotSample, warm: WarmSample, r: float):
    """
    Nelson-Aalen increments at hot failures and at warm failures for scale r,
    with the warm failures on the hot time scale
    """
    mapped, t1 = _warm_on_hot_scale(hot, warm, r)
    hot_den = np.add(*_at_risk(hot, warm, mapped, t1, hot.times))
    warm_den = np.add(*_at_risk(hot, warm, mapped, t1, mapped))
    if np.any(hot_den <= 0) or np.any(warm_den <= 0):
        msg = f"empty risk set at a failure time for r={r}"
        raise ValueError(msg)
    return 1.0 / hot_den, 1.0 / warm_den, mapped


def nelson_aalen_tilde(hot: HotSample, warm: WarmSample, r: float) -> StepFn:
    """
    Return the cumulative warm hazard estimate for a trial scale ratio `r`.

    Hot failures are mapped onto the warm time scale as T / r and pooled
    with the warm failures. A hot and a warm failure with T1 = r T2 form a
    tie and share one jump.

    Examples
    --------
    >>> L = nelson_aalen_tilde(HotSample([2.0]), WarmSample([1.0]), 1.0)
    >>> L.breakpoints, L.jumps
    (array([1., 2.]), array([0.5, 1. ]))
    >>> nelson_aalen_tilde(HotSample([2.0]), WarmSample([1.0]), 2.0).jumps
    array([1.])
    """
    if not r > 0:
        msg = f"r must be positive, got {r}"
        raise ValueError(msg)
    hot_jumps, warm_jumps, _ = _hazard_jumps(hot, warm, r)
    return from_masses(
        np.concatenate([_snap_to(hot.times / r, warm.times), warm.times]),
        np.concatenate([hot_jumps, warm_jumps]),
        kind="hazard",
    )


def u_score(hot: HotSample, warm: WarmSample, r: float) -> float:
    """
    Evaluate the estimating function U(r), a nonincreasing step function.

    Examples
    --------
    >>> hot, warm = HotSample([2.0]), WarmSample([1.0])
    >>> u_score(hot, warm, 1.0), u_score(hot, warm, 3.0)
    (0.5, -0.5)
    """
    if not r > 0:
        msg = f"r must be positive, got {r}"
        raise ValueError(msg)
    mapped, t1 = _warm_on_hot_scale(hot, warm, r)
    y1_hot, y2_hot = _at_risk(hot, warm, mapped, t1, hot.times)
    y1_warm, y2_warm = _at_risk(hot, warm, mapped, t1, mapped)
    hot_terms = y2_hot / (y1_hot + y2_hot)
    warm_terms = y2_warm / (y1_warm + y2_warm)
    return float(warm.m2 - hot_terms.sum() - warm_terms.sum())


def _r_breakpoints(hot: HotSample, warm: WarmSample) -> np.ndarray:
    ratios = [np.divide.outer(hot.times, warm.times).ravel()]
    if math.isfinite(warm.t1):
        ratios.append(hot.times / warm.t1)
    return np.unique(np.concatenate(ratios))


def estimate_r(hot: HotSample, warm: WarmSample) -> float:
    """
    Return sup{r : U(r) > 0}.

    U only changes at the ratios T1j / T2i and T1j / t1, so U is evaluated
    at those breakpoints and between them, and the sign change is located by
    bisection over that ordered sequence.

    Examples
    --------
    >>> estimate_r(HotSample([2.0]), WarmSample([1.0]))
    2.0
    """
    if warm.m2 < 1:
        msg = "the scale ratio needs at least one observed warm failure"
        raise ValueError(msg)
    bp = _r_breakpoints(hot, warm)
    k = bp.size

    # positions 0..2k: below bp[0], bp[0], (bp[0], bp[1]), bp[1], ..., above bp[-1]
    def trial(pos):
        if pos == 0:
            return 0.5 * bp[0]
        if pos == 2 * k:
            return 2.0 * bp[-1]
        i, between = divmod(pos - 1, 2)
        if between:
            return 0.5 * (bp[i] + bp[i + 1])
        return bp[i]

    if u_score(hot, warm, trial(0)) <= 0:
        msg = "U(r) is not positive for small r; the samples are inconsistent"
        raise ValueError(msg)
    if u_score(hot, warm, trial(2 * k)) > 0:
        msg = "U(r) stays positive for all r; the scale ratio is not identifiable"
        raise ValueError(msg)

    lo, hi = 0, 2 * k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if u_score(hot, warm, trial(mid)) > 0:
            lo = mid
        else:
            hi = mid
    return float(bp[lo // 2])


def cum_hazard_and_cdf(
    hot: HotSample, warm: WarmSample, r_hat: float
) -> Tuple[StepFn, StepFn, StepFn]:
    """
    Return the hot cumulative hazard and the product-limit unit CDFs.

    Warm failures are mapped to the hot time scale as r_hat * T and pooled
    with the hot failures. F2 is F1 on the warm time scale, F2(t) = F1(r_hat t).

    Returns
    -------
    lambda1_hat, f1_hat, f2_hat : StepFn

    Examples
    --------
    >>> L1, F1, F2 = cum_hazard_and_cdf(HotSample([1.0, 2.0]), WarmSample([]), 1.0)
    >>> F1(1.0), F1(2.0)
    (0.5, 1.0)
    """
    if not r_hat > 0:
        msg = f"r_hat must be positive, got {r_hat}"
        raise ValueError(msg)
    hot_jumps, warm_jumps, mapped = _hazard_jumps(hot, warm, r_hat)
    lambda1 = from_masses(
        np.concatenate([hot.times, mapped]),
        np.concatenate([hot_jumps, warm_jumps]),
        kind="hazard",
    )
    f1 = _product_limit(lambda1)
    return lambda1, f1, f1.rescale(r_hat)


def _product_limit(hazard: StepFn) -> StepFn:
    survival = np.cumprod(1.0 - np.minimum(hazard.jumps, 1.0))
    return StepFn(hazard.breakpoints, 1.0 - survival, kind="cdf")


def khat_plugin(f1_hat: StepFn, r_hat: float, k_prev: StepFn, t):
    """
    Evaluate K_j(t) = int_0^t F1(t - (1 - r) y) dK_{j-1}(y) by summing over
    the jumps of `k_prev`. Valid for any r_hat > 0.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    y = k_prev.breakpoints
    dk = k_prev.jumps
    out = np.empty(t_arr.shape)
    for start in range(0, t_arr.size, _CHUNK):
        tc = t_arr[start : start + _CHUNK]
        arg = tc[:, None] - (1.0 - r_hat) * y[None, :]
        terms = np.asarray(f1_hat(arg)) * dk[None, :]
        out[start : start + _CHUNK] = np.where(y[None, :] <= tc[:, None], terms, 0.0).sum(
            axis=1
        )
    return squeeze_output(out.reshape(np.shape(t)))


def khat_next(f1_hat: StepFn, r_hat: float, k_prev: StepFn, t):
    """
    Evaluate the next system distribution from the previous one.

    For r_hat < 1,

    K_j(t) = F2(t) K_{j-1}(t) + sum over pooled T in (r t, t] of
    K_{j-1}((t - T) / (1 - r)) dF1(T)

    with F2(t) = F1(r t) and dF1 the product-limit jump. For r_hat >= 1 the
    integrated-by-parts bounds do not apply and ``khat_plugin`` is used.

    Examples
    --------
    >>> from epxstandby.stepfn import ecdf
    >>> F1 = ecdf([1.0, 2.0])
    >>> khat_next(F1, 0.5, F1, 2.0)
    0.5
    >>> khat_next(F1, 0.5, F1, 0.0)
    0.0
    """
    if r_hat >= 1:
        return khat_plugin(f1_hat, r_hat, k_prev, t)
    if not r_hat > 0:
        msg = f"r_hat must be positive, got {r_hat}"
        raise ValueError(msg)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    pooled = f1_hat.breakpoints
    df1 = f1_hat.jumps
    out = np.asarray(f1_hat(r_hat * t_arr)) * np.asarray(k_prev(t_arr))
    for start in range(0, t_arr.size, _CHUNK):
        tc = t_arr[start : start + _CHUNK]
        inside = (pooled[None, :] > r_hat * tc[:, None]) & (pooled[None, :] <= tc[:, None])
        arg = (tc[:, None] - pooled[None, :]) / (1.0 - r_hat)
        terms = np.asarray(k_prev(arg)) * df1[None, :]
        out[start : start + _CHUNK] += np.where(inside, terms, 0.0).sum(axis=1)
    return squeeze_output(out.reshape(np.shape(t)))


def khat_curve(f1_hat: StepFn, r_hat: float, k_prev: StepFn, grid) -> StepFn:
    """
    return the next system distribution as a CDF StepFn on `grid`
    """
    grid = np.unique(np.asarray(grid, dtype=float))
    values = np.clip(np.atleast_1d(khat_next(f1_hat, r_hat, k_prev, grid)), 0.0, 1.0)
    # monotone up to rounding
    values = np.maximum.accumulate(values)
    return StepFn(grid, values, kind="cdf")


def mean_from_cdf(k: StepFn) -> float:
    """
    Return the sum of T_i [K(T_i) - K(T_{i-1})] with K(T_0) = 0.

    Examples
    --------
    >>> mean_from_cdf(StepFn([1.0, 3.0], [0.5, 1.0], kind="cdf"))
    2.0
    """
    return float(np.sum(k.breakpoints * k.jumps))


def _saturation_points(last: float, r_hat: float, m: int) -> List[float]:
    """
    times by which K_2, ..., K_m reach one when F1 reaches one at `last`
    """
    points = []
    s = last
    for _ in range(2, m + 1):
        s = (last + max(0.0, 1.0 - r_hat) * s) * (1.0 + 4 * np.finfo(float).eps)
        points.append(s)
    return points


def estimate_all(hot: HotSample, warm: WarmSample, m: int) -> EstimationResult:
    """
    Estimate the distribution and mean lifetime of an m-unit system.

    The pipeline is ``estimate_r``, ``cum_hazard_and_cdf``, then ``khat_next``
    for j = 2, ..., m on the pooled failure times, and the jump sum of K_m
    for the mean.

    Parameters
    ----------
    hot : HotSample

    warm : WarmSample
        when it contains no failures the scale ratio is not identifiable and
        only m = 1 can be estimated

    m : int
        number of units in the system

    Returns
    -------
    result : EstimationResult

    Examples
    --------
    >>> result = estimate_all(HotSample([1.0, 2.0, 3.0]), WarmSample([]), 1)
    >>> round(result.mu_hat, 12)
    2.0
    """
    if int(m) != m or m < 1:
        msg = f"the number of units m must be an integer >= 1, got {m}"
        raise ValueError(msg)

    if warm.m2 == 0:
        if m > 1:
            msg = (
                "the warm sample has no failures, so the scale ratio and the "
                "distribution of a system with stand-by units cannot be estimated"
            )
            raise ValueError(msg)
        r_hat = math.nan
        lambda1, f1, _ = cum_hazard_and_cdf(hot, WarmSample([], n2=0), 1.0)
        f2 = None
        pooled = hot.times
    else:
        r_hat = estimate_r(hot, warm)
        lambda1, f1, f2 = cum_hazard_and_cdf(hot, warm, r_hat)
        mapped, _ = _warm_on_hot_scale(hot, warm, r_hat)
        pooled = np.sort(np.concatenate([hot.times, mapped]))

    grid = f1.breakpoints
    if m > 1:
        grid = np.union1d(grid, _saturation_points(grid[-1], r_hat, m))
    k_hat = [f1]
    for _ in range(2, m + 1):
        k_hat.append(khat_curve(f1, r_hat, k_hat[-1], grid))

    k_m = k_hat[-1]
    lower_bound = not k_m.reaches_one(_ONE_TOL)
    if lower_bound:
        warning(
            f"the estimated system distribution only reaches {k_m.final_value:.4f}; "
            f"the mean lifetime is reported as a lower bound"
        )
    return EstimationResult(
        r_hat=r_hat,
        lambda1_hat=lambda1,
        f1_hat_cdf=f1,
        f2_hat_cdf=f2,
        k_hat=tuple(k_hat),
        mu_hat=mean_from_cdf(k_m),
        pooled_times=pooled,
        mu_is_lower_bound=lower_bound,
        grid=grid,
    )
