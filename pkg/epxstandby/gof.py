"""
chi-squared goodness-of-fit tests of the switching models for systems with one
warm stand-by unit
"""

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Union
import numpy as np

from .distributions import chi2_ppf, chi2_sf
from .stepfn import StepFn, ecdf, from_masses, integrate_difference, squeeze_output

__all__ = [
    "H0",
    "H0STAR",
    "DegenerateVarianceError",
    "DensityFloorError",
    "GofData",
    "GofResult",
    "ecdf",
    "ghat_h0",
    "rhat_moments",
    "fhat2_plugin",
    "fhat2_curve",
    "statistic_x",
    "x_stat_h0star_closed_form",
    "chat",
    "sigma2_h0star",
    "sigma2_h0",
    "kernel_density",
    "silverman_bandwidth",
    "decision",
    "run_test",
]

H0 = "h0"
H0STAR = "h0star"
HYPOTHESES = (H0, H0STAR)

# densities below this value are treated as zero in the variance under H0
DENSITY_FLOOR = 1e-12
# relative size below which a variance estimate is treated as zero
_DEGENERATE_RTOL = 1e-12


class DegenerateVarianceError(ValueError):
    """
    raised when the estimated variance of the test statistic is not positive
    """


class DensityFloorError(ValueError):
    """
    raised when the kernel density estimate vanishes at a point it divides by
    """

    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point


def _check_hypothesis(hypothesis: str) -> str:
    hypothesis = hypothesis.lower()
    if hypothesis not in HYPOTHESES:
        msg = f"hypothesis={hypothesis} is not one of {HYPOTHESES}"
        raise ValueError(msg)
    return hypothesis


def _as_complete_sample(times, name: str) -> np.ndarray:
    times = np.sort(np.asarray(times, dtype=float).ravel())
    if times.size == 0:
        msg = f"the {name} sample is empty"
        raise ValueError(msg)
    if not np.all(np.isfinite(times)) or times[0] <= 0:
        msg = f"{name} failure times must be positive and finite"
        raise ValueError(msg)
    return times


@dataclass(frozen=True)
class GofData(object):
    """
    Complete samples used by the tests.

    Parameters
    ----------
    systems : array_like
        lifetimes of n systems with one main and one warm stand-by unit

    hot : array_like
        failure times of n1 units tested in hot conditions

    warm : array_like
        failure times of n2 units tested in warm conditions
    """

    systems: np.ndarray
    hot: np.ndarray
    warm: np.ndarray

    def __post_init__(self):
        for name in ("systems", "hot", "warm"):
            object.__setattr__(self, name, _as_complete_sample(getattr(self, name), name))

    @property
    def n(self) -> int:
        return self.systems.size

    @property
    def n1(self) -> int:
        return self.hot.size

    @property
    def n2(self) -> int:
        return self.warm.size

    def scaled(self, a: float) -> "GofData":
        return GofData(a * self.systems, a * self.hot, a * self.warm)


@dataclass(frozen=True)
class GofResult(object):
    hypothesis: str
    x_stat: float
    sigma2_hat: float
    yn2: float
    alpha: float
    threshold: float
    p_value: float
    reject: bool

    def to_dict(self) -> dict:
        return asdict(self)


def ghat_h0(hot, warm, y):
    """
    Return the estimated equivalent time F1^{-1}(F2(y)) with empirical CDFs.

    Quantiles use the inf convention, so the result is 0 wherever F2(y) = 0.

    Examples
    --------
    >>> ghat_h0([1.0, 2.0, 3.0], [2.0, 4.0, 6.0], 4.0)
    2.0
    >>> ghat_h0([1.0, 2.0, 3.0], [2.0, 4.0, 6.0], 1.0)
    0.0
    """
    return ecdf(hot).quantile(ecdf(warm)(y))


def rhat_moments(hot, warm) -> float:
    """
    Return the ratio of the hot and warm sample means.

    Examples
    --------
    >>> rhat_moments([1.0, 2.0], [10.0, 30.0])
    0.075
    """
    return float(np.mean(hot) / np.mean(warm))


def _h0star_shift(r_hat: float) -> Callable:
    def ghat(y):
        return r_hat * np.asarray(y, dtype=float)

    return ghat


def _ghat(data: GofData, hypothesis: str) -> Callable:
    if hypothesis == H0STAR:
        return _h0star_shift(rhat_moments(data.hot, data.warm))
    f1 = ecdf(data.hot)
    f2 = ecdf(data.warm)
    return lambda y: f1.quantile(f2(y))


def fhat2_plugin(t, hot, ghat: Callable):
    """
    Evaluate the plug-in system distribution (1/n1) sum over hot T <= t of
    F1(t + ghat(T) - T).

    Examples
    --------
    >>> fhat2_plugin(2.0, [1.0, 2.0], lambda y: 0.5 * np.asarray(y))
    0.5
    >>> fhat2_plugin(0.5, [1.0, 2.0], lambda y: 0.5 * np.asarray(y))
    0.0
    """
    hot = np.sort(np.asarray(hot, dtype=float))
    f1 = ecdf(hot)
    shift = np.asarray(ghat(hot), dtype=float) - hot
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    terms = np.asarray(f1(t_arr[:, None] + shift[None, :]))
    out = np.where(hot[None, :] <= t_arr[:, None], terms, 0.0).sum(axis=1) / hot.size
    return squeeze_output(out.reshape(np.shape(t)))


def fhat2_curve(hot, ghat_at_hot) -> StepFn:
    """
    Return the plug-in system distribution as an exact StepFn.

    Each hot unit j contributes mass F1(g_j)/n1 at T1j, plus mass
    dF1(T1k)/n1 at T1k - g_j + T1j for every T1k > g_j.

    Parameters
    ----------
    hot : array_like
        sorted hot failure times

    ghat_at_hot : array_like
        the equivalent time evaluated at each hot failure time
    """
    hot = np.asarray(hot, dtype=float)
    g = np.asarray(ghat_at_hot, dtype=float)
    n1 = hot.size
    f1 = ecdf(hot)
    support, dF = f1.breakpoints, f1.jumps

    locations = [hot]
    masses = [np.asarray(f1(g)) / n1]
    later = support[None, :] > g[:, None]
    shifted = support[None, :] - g[:, None] + hot[:, None]
    locations.append(shifted[later])
    masses.append(np.broadcast_to(dF[None, :], later.shape)[later] / n1)
    return from_masses(np.concatenate(locations), np.concatenate(masses), kind="cdf")


def statistic_x(data: GofData, hypothesis: str = H0STAR) -> float:
    """
    Return X = sqrt(n) times the integral of the difference between the
    empirical system distribution and the plug-in one.

    X > 0 means the systems fail earlier than the hypothesis predicts.
    """
    hypothesis = _check_hypothesis(hypothesis)
    ghat = _ghat(data, hypothesis)
    plug_in = fhat2_curve(data.hot, ghat(data.hot))
    return math.sqrt(data.n) * integrate_difference(ecdf(data.systems), plug_in)


def x_stat_h0star_closed_form(data: GofData) -> float:
    """
    Return X under the scale model in closed form.

    The plug-in mean lifetime is mu1 + (1/n1^2) sum_j sum_k (T1k - r T1j)^+,
    which reduces to (2 - r) mu1 when r max(hot) <= min(hot).
    """
    r_hat = rhat_moments(data.hot, data.warm)
    hot = data.hot
    excess = np.maximum(hot[None, :] - r_hat * hot[:, None], 0.0).sum()
    mu_plug_in = hot.mean() + excess / data.n1 ** 2
    return math.sqrt(data.n) * (mu_plug_in - data.systems.mean())


def chat(hot, warm, mu2_hat: float) -> float:
    """
    Return (1 / (mu2 n1)) sum_i T1i [1 - F2(T1i)].

    Examples
    --------
    >>> round(chat([1.0, 2.0], [2.0, 4.0], 3.0), 12)
    0.333333333333
    """
    hot = np.asarray(hot, dtype=float)
    f2 = ecdf(warm)
    return float(np.sum(hot * (1.0 - np.asarray(f2(hot)))) / (mu2_hat * hot.size))


def _cumulative_sum_at(keys: np.ndarray, weights: np.ndarray, x) -> np.ndarray:
    """
    sum of `weights` over `keys` <= x
    """
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    csum = np.concatenate([[0.0], np.cumsum(weights[order])])
    return csum[np.searchsorted(keys, x, side="right")]


def _check_variance(sigma2: float, scale: float) -> float:
    if not sigma2 > _DEGENERATE_RTOL * scale ** 2:
        msg = (
            f"the estimated variance {sigma2:.3e} is not positive; the samples "
            f"are degenerate"
        )
        raise DegenerateVarianceError(msg)
    return float(sigma2)


def sigma2_h0star(data: GofData) -> float:
    """
    Return the plug-in variance of X under the scale model.

    The estimate is the sum of a systems term, a hot term through the
    function H, and a warm term through the constant c.

    Raises
    ------
    DegenerateVarianceError
        if the estimate is not positive
    """
    _check_sizes(data)
    n, n1, n2 = data.n, data.n1, data.n2
    hot, warm, systems = data.hot, data.warm, data.systems
    mu1, mu2 = hot.mean(), warm.mean()
    r_hat = mu1 / mu2
    c_hat = chat(hot, warm, mu2)
    f1, f2 = ecdf(hot), ecdf(warm)

    x = hot
    h = (
        x * (c_hat + r_hat - 1.0 - np.asarray(f1(x / r_hat)) - r_hat * np.asarray(f2(x)))
        + r_hat / n1 * _cumulative_sum_at(hot, hot, x / r_hat)
        + r_hat / n2 * _cumulative_sum_at(warm, warm, x)
    )
    sigma2 = (
        np.mean((systems - systems.mean()) ** 2)
        + n / n1 ** 2 * np.sum((h - h.mean()) ** 2)
        + c_hat ** 2 * r_hat ** 2 * n / n2 ** 2 * np.sum((warm - mu2) ** 2)
    )
    return _check_variance(sigma2, max(systems.max(), hot.max(), warm.max()))


def _check_sizes(data: GofData):
    if min(data.n, data.n1, data.n2) < 2:
        msg = (
            f"variance estimates need at least two observations per sample, got "
            f"n={data.n}, n1={data.n1}, n2={data.n2}"
        )
        raise ValueError(msg)


def silverman_bandwidth(sample) -> float:
    """
    return the rule-of-thumb bandwidth 1.06 * std * n^(-1/5)
    """
    sample = np.asarray(sample, dtype=float)
    if sample.size < 2:
        msg = "a bandwidth needs at least two observations"
        raise ValueError(msg)
    std = np.std(sample, ddof=1)
    if not std > 0:
        msg = "a bandwidth needs a sample with positive spread"
        raise DegenerateVarianceError(msg)
    return float(1.06 * std * sample.size ** (-0.2))


def kernel_density(sample, x, bandwidth: float):
    """
    Return the Gaussian kernel density estimate of `sample` at `x`.

    Examples
    --------
    >>> round(kernel_density([0.0], 0.0, 1.0), 5)
    0.39894
    """
    if not bandwidth > 0:
        msg = f"the bandwidth must be positive, got {bandwidth}"
        raise ValueError(msg)
    sample = np.asarray(sample, dtype=float).ravel()
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    u = (x_arr[:, None] - sample[None, :]) / bandwidth
    dens = np.exp(-0.5 * u ** 2).sum(axis=1) / (sample.size * bandwidth * math.sqrt(2 * math.pi))
    return squeeze_output(dens.reshape(np.shape(x)))


def sigma2_h0(
    data: GofData,
    bandwidth_rule: Union[None, float, Callable] = None,
) -> float:
    """
    Return the plug-in variance of X under the equivalent-time model.

    Parameters
    ----------
    data : GofData

    bandwidth_rule : float or callable, optional
        a fixed bandwidth, or a function of the hot sample returning one;
        ``silverman_bandwidth`` by default

    Raises
    ------
    DensityFloorError
        if the density estimate at an equivalent time falls below
        ``DENSITY_FLOOR``

    DegenerateVarianceError
        if the estimate is not positive
    """
    _check_sizes(data)
    n, n1, n2 = data.n, data.n1, data.n2
    hot, warm, systems = data.hot, data.warm, data.systems
    f1, f2 = ecdf(hot), ecdf(warm)

    if bandwidth_rule is None:
        bandwidth = silverman_bandwidth(hot)
    elif callable(bandwidth_rule):
        bandwidth = float(bandwidth_rule(hot))
    else:
        bandwidth = float(bandwidth_rule)

    def ghat(y):
        return np.asarray(f1.quantile(f2(y)))

    def ghat_inv(x):
        return np.asarray(f2.quantile(f1(x)))

    g_hot = ghat(hot)
    dens = np.asarray(kernel_density(hot, g_hot, bandwidth))
    low = dens < DENSITY_FLOOR
    if np.any(low):
        point = float(g_hot[np.argmax(low)])
        msg = (
            f"the kernel density at equivalent time {point} is {dens[low][0]:.3e}, "
            f"below the floor {DENSITY_FLOOR}"
        )
        raise DensityFloorError(msg, point=point)

    q_weights = (1.0 - np.asarray(f2(hot))) / dens

    def q_hat(x):
        return _cumulative_sum_at(hot, q_weights, x) / n1

    g_warm = ghat(warm)

    def h_hat(x):
        return (
            q_hat(x)
            - x * np.asarray(f1(ghat_inv(x)))
            + ghat(x) * (1.0 - np.asarray(f2(x)))
            + _cumulative_sum_at(g_hot, g_hot, x) / n1
            + _cumulative_sum_at(warm, g_warm, x) / n2
            - x
        )

    h = h_hat(hot)
    q = q_hat(warm)
    sigma2 = (
        np.mean((systems - systems.mean()) ** 2)
        + n / n1 ** 2 * np.sum((h - h.mean()) ** 2)
        + n / n2 ** 2 * np.sum((q - q.mean()) ** 2)
    )
    return _check_variance(sigma2, max(systems.max(), hot.max(), warm.max()))


def decision(yn2: float, alpha: float):
    """
    Return (threshold, p_value, reject) for the statistic `yn2`.

    The hypothesis is rejected only when yn2 is strictly above the
    1 - alpha quantile of the chi-squared law with one degree of freedom.

    Examples
    --------
    >>> threshold, p_value, reject = decision(0.0, 0.05)
    >>> round(threshold, 4), p_value, reject
    (3.8415, 1.0, False)
    """
    if not 0.0 < alpha < 0.5:
        msg = f"alpha must lie in (0, 0.5), got {alpha}"
        raise ValueError(msg)
    threshold = chi2_ppf(1.0 - alpha)
    return threshold, chi2_sf(yn2), bool(yn2 > threshold)


def run_test(
    data: GofData,
    hypothesis: str = H0STAR,
    alpha: float = 0.05,
    bandwidth_rule: Union[None, float, Callable] = None,
) -> GofResult:
    """
    Test whether the systems data agree with the hot and warm samples.

    Parameters
    ----------
    data : GofData

    hypothesis : {"h0", "h0star"}
        "h0star" tests the scale model F2(t) = F1(r t); "h0" the general
        equivalent-time model

    alpha : float
        significance level in (0, 0.5)

    bandwidth_rule : float or callable, optional
        bandwidth of the density estimate used under "h0"

    Returns
    -------
    result : GofResult
    """
    hypothesis = _check_hypothesis(hypothesis)
    if not 0.0 < alpha < 0.5:
        msg = f"alpha must lie in (0, 0.5), got {alpha}"
        raise ValueError(msg)
    x_stat = statistic_x(data, hypothesis)
    if hypothesis == H0STAR:
        sigma2 = sigma2_h0star(data)
    else:
        sigma2 = sigma2_h0(data, bandwidth_rule)
    yn2 = x_stat ** 2 / sigma2
    threshold, p_value, reject = decision(yn2, alpha)
    return GofResult(
        hypothesis=hypothesis,
        x_stat=x_stat,
        sigma2_hat=sigma2,
        yn2=yn2,
        alpha=alpha,
        threshold=threshold,
        p_value=p_value,
        reject=reject,
    )
