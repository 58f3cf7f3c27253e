"""
parametric unit lifetime laws and the normal / chi-squared helpers used by the
goodness-of-fit tests
"""

import math
from typing import Dict, Union
import numpy as np
from scipy import stats

from .stepfn import squeeze_output

__all__ = [
    "ParametricDist",
    "Exponential",
    "Weibull",
    "dist_from_dict",
    "normal_cdf",
    "normal_ppf",
    "chi2_ppf",
    "chi2_sf",
]


class ParametricDist(object):
    """
    A continuous lifetime distribution on [0, inf).

    Subclasses wrap a frozen ``scipy.stats`` distribution and provide
    ``scaled`` so that the law of ``T / r`` stays in the same family.
    """

    family = None

    def __init__(self, frozen):
        self._frozen = frozen

    @property
    def params(self) -> Dict[str, float]:
        raise NotImplementedError

    def cdf(self, t) -> Union[float, np.ndarray]:
        return squeeze_output(self._frozen.cdf(t))

    def pdf(self, t) -> Union[float, np.ndarray]:
        return squeeze_output(self._frozen.pdf(t))

    def quantile(self, u) -> Union[float, np.ndarray]:
        return squeeze_output(self._frozen.ppf(u))

    def sample(self, rng: np.random.Generator, size=None) -> Union[float, np.ndarray]:
        """
        Draw lifetimes by inverse transform.

        Parameters
        ----------
        rng : numpy.random.Generator

        size : int or tuple, optional
            output shape, a single float is returned when None
        """
        return self.quantile(rng.uniform(size=size))

    def scaled(self, r: float) -> "ParametricDist":
        """
        return the member of the family with CDF t -> self.cdf(r * t)
        """
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Union[str, float]]:
        return {"family": self.family, **self.params}

    def __eq__(self, other):
        return (
            isinstance(other, ParametricDist)
            and self.family == other.family
            and self.params == other.params
        )

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.params.items()))))

    def __repr__(self):
        args = ", ".join(f"{key}={val!r}" for key, val in self.params.items())
        return f"{type(self).__name__}({args})"


class Exponential(ParametricDist):
    """
    Exponential lifetimes with failure rate `rate`.

    Examples
    --------
    >>> d = Exponential(0.5)
    >>> d.scaled(2.0)
    Exponential(rate=1.0)
    >>> d.cdf(0.0)
    0.0
    """

    family = "exponential"

    def __init__(self, rate: float = 1.0):
        rate = float(rate)
        if not rate > 0 or not math.isfinite(rate):
            msg = f"the exponential rate must be positive and finite, got {rate}"
            raise ValueError(msg)
        self.rate = rate
        super().__init__(stats.expon(scale=1.0 / rate))

    @property
    def params(self):
        return {"rate": self.rate}

    def scaled(self, r):
        if not r > 0:
            msg = f"the scale factor must be positive, got {r}"
            raise ValueError(msg)
        return Exponential(self.rate * r)


class Weibull(ParametricDist):
    """
    Weibull lifetimes, F(t) = 1 - exp(-(t / scale) ** shape).
    """

    family = "weibull"

    def __init__(self, shape: float = 1.0, scale: float = 1.0):
        shape = float(shape)
        scale = float(scale)
        if not shape > 0 or not scale > 0:
            msg = f"Weibull shape and scale must be positive, got {shape}, {scale}"
            raise ValueError(msg)
        self.shape = shape
        self.scale = scale
        super().__init__(stats.weibull_min(shape, scale=scale))

    @property
    def params(self):
        return {"shape": self.shape, "scale": self.scale}

    def scaled(self, r):
        if not r > 0:
            msg = f"the scale factor must be positive, got {r}"
            raise ValueError(msg)
        return Weibull(self.shape, self.scale / r)


def dist_from_dict(params: Dict[str, Union[str, float]]) -> ParametricDist:
    """
    Rebuild a distribution from the output of ``ParametricDist.to_dict``.

    Examples
    --------
    >>> dist_from_dict({"family": "weibull", "shape": 2.0, "scale": 3.0})
    Weibull(shape=2.0, scale=3.0)
    """
    params = dict(params)
    family = params.pop("family", None)
    if family == "exponential":
        return Exponential(**params)
    elif family == "weibull":
        return Weibull(**params)
    msg = f"family={family} is not one of 'exponential', 'weibull'"
    raise ValueError(msg)


# standard normal quantile, algorithm AS 111 (Beasley and Springer)
_SPLIT = 0.42
_A = (2.50662823884, -18.61500062529, 41.39119773534, -25.44106049637)
_B = (-8.47351093090, 23.08336743743, -21.06224101826, 3.13082909833)
_C = (-2.78718931138, -2.29796479134, 4.85014127135, 2.32121276858)
_D = (3.54388924762, 1.63706781897)


def normal_cdf(x: float) -> float:
    """
    standard normal distribution function
    """
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _ppnd(p: float) -> float:
    q = p - 0.5
    if abs(q) <= _SPLIT:
        r = q * q
        num = ((_A[3] * r + _A[2]) * r + _A[1]) * r + _A[0]
        den = (((_B[3] * r + _B[2]) * r + _B[1]) * r + _B[0]) * r + 1.0
        return q * num / den
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    z = (((_C[3] * r + _C[2]) * r + _C[1]) * r + _C[0]) / ((_D[1] * r + _D[0]) * r + 1.0)
    return -z if q < 0 else z


def normal_ppf(p: float) -> float:
    """
    Return the standard normal quantile.

    A rational approximation accurate to about 1e-7, refined with two Newton
    steps on the distribution function.

    Examples
    --------
    >>> round(normal_ppf(0.975), 6)
    1.959964
    >>> normal_ppf(0.5)
    0.0
    """
    if not 0.0 < p < 1.0:
        if p == 0.0:
            return -math.inf
        if p == 1.0:
            return math.inf
        msg = f"a probability must lie in [0, 1], got {p}"
        raise ValueError(msg)
    z = _ppnd(p)
    for _ in range(2):
        density = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        z = z + (p - normal_cdf(z)) / density
    return z


def chi2_ppf(q: float, df: int = 1) -> float:
    """
    Return the q-quantile of the chi-squared law with one degree of freedom.

    Examples
    --------
    >>> round(chi2_ppf(0.95), 4)
    3.8415
    """
    if df != 1:
        msg = f"only one degree of freedom is supported, got df={df}"
        raise ValueError(msg)
    if not 0.0 <= q < 1.0:
        msg = f"q must lie in [0, 1), got {q}"
        raise ValueError(msg)
    z = normal_ppf(0.5 + 0.5 * q)
    return z * z


def chi2_sf(x: float, df: int = 1) -> float:
    """
    Return P(chi2(1) > x).

    Examples
    --------
    >>> chi2_sf(0.0)
    1.0
    """
    if df != 1:
        msg = f"only one degree of freedom is supported, got df={df}"
        raise ValueError(msg)
    if x <= 0:
        return 1.0
    return math.erfc(math.sqrt(x / 2.0))
