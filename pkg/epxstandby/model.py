"""
switching models for a main unit with warm stand-by units, the recurrent
system distribution, and exact simulation of system lifetimes
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union
import numpy as np

from .distributions import ParametricDist
from .stepfn import squeeze_output

__all__ = [
    "ConvergenceError",
    "ScaleAFT",
    "GeneralSedyakin",
    "StandbyModel",
    "SystemConfig",
    "make_rng",
    "equivalent_time",
    "equivalent_time_derivative",
    "system_cdf_recurrence",
    "exp_system_cdf_closed_form",
    "exp_system_mean",
    "standby_lifetime_from_uniform",
    "sample_standby_lifetime",
    "simulate_system",
]


class ConvergenceError(RuntimeError):
    """
    raised when the quadrature for the system distribution does not settle
    """


@dataclass(frozen=True)
class ScaleAFT(object):
    """
    warm and hot lifetimes differ only in scale, F2(t) = F1(r t)
    """

    r: float

    def __post_init__(self):
        if not self.r > 0 or not math.isfinite(self.r):
            msg = f"the scale ratio r must be positive and finite, got {self.r}"
            raise ValueError(msg)


@dataclass(frozen=True)
class GeneralSedyakin(object):
    """
    an arbitrary warm lifetime law; residual life after the switch follows the
    equivalent-time principle
    """

    warm: ParametricDist


@dataclass(frozen=True)
class StandbyModel(object):
    """
    Parametric description of a unit under hot and warm stress.

    Parameters
    ----------
    hot : ParametricDist
        lifetime law F1 of a unit working in hot conditions

    mode : ScaleAFT or GeneralSedyakin
        how the warm law F2 relates to F1

    damage_p : float
        probability mass moved onto the switch instant, the fraction
        p (1 - F2(y)) of stand-by units that fail at the switch. 0 means the
        switch leaves the unit undamaged.

    Examples
    --------
    >>> from epxstandby.distributions import Exponential
    >>> model = StandbyModel(Exponential(1.0), ScaleAFT(0.5))
    >>> model.warm
    Exponential(rate=0.5)
    """

    hot: ParametricDist
    mode: Union[ScaleAFT, GeneralSedyakin]
    damage_p: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.damage_p <= 1.0:
            msg = f"damage_p must lie in [0, 1], got {self.damage_p}"
            raise ValueError(msg)
        if not isinstance(self.mode, (ScaleAFT, GeneralSedyakin)):
            msg = f"mode must be ScaleAFT or GeneralSedyakin, got {self.mode!r}"
            raise ValueError(msg)

    @property
    def warm(self) -> ParametricDist:
        if isinstance(self.mode, ScaleAFT):
            return self.hot.scaled(self.mode.r)
        return self.mode.warm

    def with_damage(self, p: float) -> "StandbyModel":
        return replace(self, damage_p=p)


@dataclass(frozen=True)
class SystemConfig(object):
    """
    a system of `m` units: one main unit and m - 1 warm stand-by units
    """

    m: int
    model: StandbyModel

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            msg = f"the number of units m must be an integer >= 1, got {self.m}"
            raise ValueError(msg)


def make_rng(seed: int) -> np.random.Generator:
    """
    return a counter-based generator seeded with `seed`
    """
    return np.random.Generator(np.random.Philox(seed))


def equivalent_time(model: StandbyModel, y):
    """
    Return the hot-stress time with the same survival as warm time `y`.

    Examples
    --------
    >>> from epxstandby.distributions import Exponential
    >>> equivalent_time(StandbyModel(Exponential(1.0), ScaleAFT(0.5)), 4.0)
    2.0
    """
    if isinstance(model.mode, ScaleAFT):
        return squeeze_output(model.mode.r * np.asarray(y, dtype=float))
    return model.hot.quantile(model.warm.cdf(y))


def equivalent_time_derivative(model: StandbyModel, y):
    """
    return g'(y) = f2(y) / f1(g(y))
    """
    if isinstance(model.mode, ScaleAFT):
        return squeeze_output(np.full(np.shape(y), model.mode.r, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        return squeeze_output(
            np.asarray(model.warm.pdf(y))
            / np.asarray(model.hot.pdf(equivalent_time(model, y)))
        )


def _recurrence_at(model: StandbyModel, m: int, t: float, n: int) -> np.ndarray:
    """
    trapezoid approximation of K_1(t), ..., K_m(t) on a uniform grid with n
    intervals, using the integrated-by-parts form
    K_j(t) = F2(t) K_{j-1}(t) + int_0^t K_{j-1}(y) f1(t + g(y) - y)(1 - g'(y)) dy
    """
    y = np.linspace(0.0, t, n + 1)
    h = t / n
    g = np.asarray(equivalent_time(model, y))
    dg = np.asarray(equivalent_time_derivative(model, y))
    warm_cdf = np.asarray(model.warm.cdf(y))

    with np.errstate(invalid="ignore", divide="ignore"):
        density = np.asarray(model.hot.pdf(y[:, None] + (g - y)[None, :]))
        weights = density * (1.0 - dg)[None, :]
    weights = np.tril(np.nan_to_num(weights, nan=0.0, posinf=0.0, neginf=0.0))
    # K_{j-1}(0) = 0 so the first column never contributes
    weights[:, 0] = 0.0

    k = np.asarray(model.hot.cdf(y))
    out = [k[-1]]
    for _ in range(2, m + 1):
        terms = weights * k[None, :]
        integral = h * (terms.sum(axis=1) - 0.5 * np.diag(terms))
        k = warm_cdf * k + integral
        out.append(k[-1])
    return np.asarray(out)


def system_cdf_recurrence(
    config: SystemConfig,
    t_grid: Sequence[float],
    tol: float = 1e-8,
    min_intervals: int = 16,
    max_intervals: int = 2048,
) -> np.ndarray:
    """
    Evaluate the system distributions K_1, ..., K_m on a grid of times.

    K_1 = F1 and K_j(t) = int_0^t F1(t + g(y) - y) dK_{j-1}(y) for j >= 2.
    Each time point is integrated on its own uniform grid; the trapezoid
    rule is Richardson-extrapolated and the grid doubled until successive
    estimates agree to `tol`.

    Parameters
    ----------
    config : SystemConfig
        system with a parametric model and damage_p = 0

    t_grid : array_like
        sorted, non-negative evaluation times

    tol : float
        absolute convergence tolerance

    Returns
    -------
    k : numpy.ndarray
        array of shape (m, len(t_grid)); row j - 1 holds K_j

    Raises
    ------
    ConvergenceError
        if `max_intervals` is reached before the tolerance is met

    Examples
    --------
    >>> from epxstandby.distributions import Exponential
    >>> config = SystemConfig(2, StandbyModel(Exponential(1.0), ScaleAFT(0.5)))
    >>> k = system_cdf_recurrence(config, [0.0, 1.0])
    >>> round(float(k[1, 1]), 6)
    0.342622
    """
    model = config.model
    if model.damage_p != 0:
        msg = f"the recurrence holds for damage_p = 0 only, got {model.damage_p}"
        raise ValueError(msg)
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    if np.any(t_grid < 0):
        msg = "evaluation times must be non-negative"
        raise ValueError(msg)
    if np.any(np.diff(t_grid) < 0):
        msg = "evaluation times must be sorted"
        raise ValueError(msg)

    out = np.zeros((config.m, t_grid.size))
    for i, t in enumerate(t_grid):
        if t == 0:
            continue
        if config.m == 1:
            out[0, i] = model.hot.cdf(t)
            continue
        n = min_intervals
        coarse = _recurrence_at(model, config.m, t, n)
        previous = None
        while True:
            fine = _recurrence_at(model, config.m, t, 2 * n)
            extrapolated = (4.0 * fine - coarse) / 3.0
            if previous is not None and np.max(np.abs(extrapolated - previous)) < tol:
                break
            n *= 2
            if 2 * n > max_intervals:
                msg = (
                    f"quadrature for t={t} did not reach tol={tol} with "
                    f"{max_intervals} intervals; last change "
                    f"{np.max(np.abs(extrapolated - previous)):.3e}"
                )
                raise ConvergenceError(msg)
            previous = extrapolated
            coarse = fine
        out[:, i] = np.clip(extrapolated, 0.0, 1.0)
    return out


def exp_system_cdf_closed_form(lambda1: float, lambda2: float, t):
    """
    Return the distribution function of a two-unit exponential system.

    1 - (1 + l1 / l2) exp(-l1 t) + (l1 / l2) exp(-(l1 + l2) t)

    Examples
    --------
    >>> exp_system_cdf_closed_form(1.0, 1.0, 0.0)
    0.0
    >>> round(exp_system_cdf_closed_form(1.0, 1.0, 1.0), 6)
    0.399576
    """
    if not lambda1 > 0 or not lambda2 > 0:
        msg = f"rates must be positive, got {lambda1}, {lambda2}"
        raise ValueError(msg)
    t = np.asarray(t, dtype=float)
    ratio = lambda1 / lambda2
    out = (
        1.0
        - (1.0 + ratio) * np.exp(-lambda1 * t)
        + ratio * np.exp(-(lambda1 + lambda2) * t)
    )
    return squeeze_output(np.maximum(out, 0.0))


def exp_system_mean(lambda1: float, lambda2: float) -> float:
    """
    Return the mean lifetime of a two-unit exponential system.

    Examples
    --------
    >>> round(exp_system_mean(1.0, 0.5), 12)
    1.666666666667
    """
    if not lambda1 > 0 or not lambda2 > 0:
        msg = f"rates must be positive, got {lambda1}, {lambda2}"
        raise ValueError(msg)
    return 1.0 / lambda1 + 1.0 / (lambda1 + lambda2)


def standby_lifetime_from_uniform(model: StandbyModel, y, u):
    """
    Map a uniform draw to the lifetime of a stand-by unit switched in at `y`.

    A single uniform drives the whole construction: the unit fails in warm
    conditions at F2^{-1}(u) if that happens before `y`; otherwise it fails
    at the switch instant when u falls in the damage band of width
    p (1 - F2(y)); otherwise it fails at y + F1^{-1}(u) - F1^{-1}(a) where
    a = F2(y) + p (1 - F2(y)). For fixed u the result is nonincreasing in p.

    Parameters
    ----------
    model : StandbyModel

    y : float or array_like
        failure time of the unit being replaced

    u : float or array_like
        uniform draws on (0, 1), broadcast against `y`

    Examples
    --------
    >>> from epxstandby.distributions import Exponential
    >>> model = StandbyModel(Exponential(1.0), ScaleAFT(0.5))
    >>> u = float(model.warm.cdf(8.0))
    >>> round(standby_lifetime_from_uniform(model, 5.0, u), 10)
    6.5
    """
    y, u = np.broadcast_arrays(
        np.asarray(y, dtype=float), np.asarray(u, dtype=float)
    )
    warm_time = np.asarray(model.warm.quantile(u))
    out = np.array(warm_time, dtype=float, copy=True)

    survived = warm_time > y
    if np.any(survived):
        ys = y[survived]
        us = u[survived]
        p = model.damage_p
        warm_cdf = np.asarray(model.warm.cdf(ys))
        level = warm_cdf + p * (1.0 - warm_cdf)
        if p == 0:
            damaged = np.zeros(us.shape, dtype=bool)
            shift = np.asarray(equivalent_time(model, ys))
        else:
            damaged = us <= level
            shift = np.asarray(model.hot.quantile(level))
        with np.errstate(invalid="ignore"):
            residual = ys + np.asarray(model.hot.quantile(us)) - shift
        # u == 1 or a saturated level map to inf - inf
        residual = np.where(np.isfinite(residual), residual, np.inf)
        out[survived] = np.where(damaged, ys, np.maximum(residual, ys))
    return squeeze_output(out)


def sample_standby_lifetime(rng: np.random.Generator, model: StandbyModel, y):
    """
    draw the lifetime of a stand-by unit whose predecessor fails at `y`
    """
    u = rng.uniform(size=np.shape(y) or None)
    return standby_lifetime_from_uniform(model, y, u)


def simulate_system(
    rng: np.random.Generator, config: SystemConfig, size: Optional[int] = None
):
    """
    Simulate system lifetimes, the maximum over the chain of replacements.

    Parameters
    ----------
    rng : numpy.random.Generator

    config : SystemConfig

    size : int, optional
        number of independent systems, a single float is returned when None

    Returns
    -------
    lifetimes : float or numpy.ndarray
    """
    y = np.asarray(config.model.hot.sample(rng, size), dtype=float)
    for _ in range(2, config.m + 1):
        y = np.maximum(y, np.asarray(sample_standby_lifetime(rng, config.model, y)))
    return squeeze_output(y)
