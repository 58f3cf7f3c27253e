"""
piecewise-constant functions used for every empirical curve in the package
"""

from typing import Optional, Sequence, Union
import numpy as np

__all__ = ["StepFn", "ecdf", "from_masses", "integrate_difference"]

ArrayLike = Union[float, Sequence[float], np.ndarray]

# tolerance used when checking that a CDF reaches one
_ONE_TOL = 1e-9


def squeeze_output(x) -> Union[float, np.ndarray]:
    """
    return a python float for 0-d input and an ndarray otherwise
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return float(x)
    return x


class StepFn(object):
    """
    A piecewise-constant function of time.

    Parameters
    ----------
    breakpoints : array_like
        strictly increasing, non-negative jump locations

    values : array_like
        the value taken from each breakpoint on, same length as `breakpoints`

    value_before_first : float
        the value taken before the first breakpoint

    right_continuous : bool
        if True, evaluation at `t` returns the value at the largest
        breakpoint <= t. If False, the largest breakpoint < t is used, which
        is the convention for at-risk processes.

    kind : {None, "cdf", "hazard"}
        optional tag. A "cdf" has values in [0, 1], nondecreasing, and starts
        at 0. A "hazard" is nondecreasing and non-negative.

    Examples
    --------
    >>> f = StepFn([1.0, 3.0], [0.5, 1.0], kind="cdf")
    >>> f(2.0)
    0.5
    >>> f(0.5)
    0.0
    >>> f.tail_integral()
    2.0
    """

    def __init__(
        self,
        breakpoints: ArrayLike,
        values: ArrayLike,
        value_before_first: float = 0.0,
        right_continuous: bool = True,
        kind: Optional[str] = None,
    ):
        breakpoints = np.asarray(breakpoints, dtype=float).ravel()
        values = np.asarray(values, dtype=float).ravel()

        if breakpoints.shape != values.shape:
            msg = (
                f"breakpoints and values must have the same length, got "
                f"{breakpoints.size} and {values.size}"
            )
            raise ValueError(msg)
        if breakpoints.size > 0:
            if breakpoints[0] < 0:
                msg = f"breakpoints must be non-negative, got {breakpoints[0]}"
                raise ValueError(msg)
            if np.any(np.diff(breakpoints) <= 0):
                msg = "breakpoints must be strictly increasing"
                raise ValueError(msg)

        self.breakpoints = breakpoints
        self.values = values
        self.value_before_first = float(value_before_first)
        self.right_continuous = right_continuous
        self.kind = kind

        if kind == "cdf":
            self._check_cdf()
        elif kind == "hazard":
            self._check_hazard()
        elif kind is not None:
            msg = f"kind={kind} is not one of None, 'cdf', 'hazard'"
            raise ValueError(msg)

    def _check_cdf(self):
        if self.value_before_first != 0.0:
            msg = "a CDF must be 0 before its first breakpoint"
            raise ValueError(msg)
        if self.values.size == 0:
            return
        if self.values.min() < -_ONE_TOL or self.values.max() > 1 + _ONE_TOL:
            msg = "CDF values must lie in [0, 1]"
            raise ValueError(msg)
        if np.any(np.diff(self.values) < -_ONE_TOL):
            msg = "CDF values must be nondecreasing"
            raise ValueError(msg)

    def _check_hazard(self):
        if self.values.size == 0:
            return
        if self.value_before_first < 0 or self.values.min() < 0:
            msg = "cumulative hazard values must be non-negative"
            raise ValueError(msg)
        if np.any(np.diff(self.values) < 0):
            msg = "cumulative hazard values must be nondecreasing"
            raise ValueError(msg)

    def __call__(self, t: ArrayLike) -> Union[float, np.ndarray]:
        t = np.asarray(t, dtype=float)
        side = "right" if self.right_continuous else "left"
        idx = np.searchsorted(self.breakpoints, t, side=side) - 1
        if self.values.size == 0:
            out = np.full(t.shape, self.value_before_first)
        else:
            out = np.where(
                idx < 0,
                self.value_before_first,
                self.values[np.clip(idx, 0, None)],
            )
        return squeeze_output(out)

    def __repr__(self):
        return (
            f"StepFn(breakpoints={self.breakpoints!r}, values={self.values!r}, "
            f"value_before_first={self.value_before_first!r}, kind={self.kind!r})"
        )

    def __len__(self):
        return self.breakpoints.size

    @property
    def jumps(self) -> np.ndarray:
        """
        the jump size at each breakpoint
        """
        return np.diff(self.values, prepend=self.value_before_first)

    @property
    def final_value(self) -> float:
        """
        the value after the last breakpoint
        """
        if self.values.size == 0:
            return self.value_before_first
        return float(self.values[-1])

    def reaches_one(self, tol: float = _ONE_TOL) -> bool:
        return abs(self.final_value - 1.0) <= tol

    def quantile(self, y: ArrayLike) -> Union[float, np.ndarray]:
        """
        Return the inf-quantile inf{s >= 0 : F(s) >= y}.

        Parameters
        ----------
        y : array_like
            probability levels

        Returns
        -------
        s : float or ndarray
            0 where y is attained at time 0, and inf where the function
            never reaches y.

        Examples
        --------
        >>> F = ecdf([1.0, 2.0, 3.0])
        >>> F.quantile(2 / 3)
        2.0
        >>> F.quantile(0.0)
        0.0
        """
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.values, y, side="left")
        padded = np.append(self.breakpoints, np.inf)
        out = padded[idx]
        out = np.where(y <= self.value_before_first, 0.0, out)
        return squeeze_output(out)

    def rescale(self, a: float) -> "StepFn":
        """
        Return the function t -> self(a * t).

        Each new breakpoint is the float b at which a * b, as computed in
        floating point, first passes the old breakpoint, so evaluating the
        result at t agrees exactly with evaluating self at a * t. Breakpoints
        that collide after scaling are merged and keep the later value.

        Examples
        --------
        >>> G = StepFn([1.0, 3.0], [0.5, 1.0], kind="cdf").rescale(0.5)
        >>> G.breakpoints
        array([2., 6.])
        """
        if a <= 0:
            msg = f"the time scale must be positive, got {a}"
            raise ValueError(msg)
        bp = self.breakpoints
        b = bp / a
        finite = np.isfinite(b)
        # right-continuous: smallest b with a * b >= bp, else largest b with a * b <= bp
        sign = 1.0 if self.right_continuous else -1.0
        up, down = sign * np.inf, -sign * np.inf

        def passed(x):
            return sign * (a * x - bp) >= 0

        while True:
            short = finite & ~passed(b)
            if not short.any():
                break
            b[short] = np.nextafter(b[short], up)
        while True:
            back = np.nextafter(b, down)
            move = finite & passed(back)
            if not move.any():
                break
            b[move] = back[move]

        keep = np.ones(b.size, dtype=bool)
        keep[:-1] = b[1:] != b[:-1]
        return StepFn(
            b[keep],
            self.values[keep],
            value_before_first=self.value_before_first,
            right_continuous=self.right_continuous,
            kind=self.kind,
        )

    def tail_integral(self) -> float:
        """
        Return the exact value of the integral of 1 - F over [0, inf).

        Raises
        ------
        ValueError
            if the function does not reach 1, in which case the integral
            may diverge.
        """
        if not self.reaches_one():
            msg = (
                f"the CDF ends at {self.final_value}, not 1; the integral of "
                f"its survival function may diverge"
            )
            raise ValueError(msg)
        left = np.concatenate([[0.0], self.breakpoints[self.breakpoints > 0]])
        survival = 1.0 - np.asarray(self(left))
        return float(np.sum(survival[:-1] * np.diff(left)))


def ecdf(sample: ArrayLike) -> StepFn:
    """
    Return the empirical distribution function of `sample`.

    Examples
    --------
    >>> F = ecdf([1.0, 2.0, 3.0])
    >>> F(2.0)
    0.6666666666666666
    >>> F(1.999)
    0.3333333333333333
    """
    sample = np.asarray(sample, dtype=float).ravel()
    if sample.size == 0:
        msg = "the empirical distribution function of an empty sample is undefined"
        raise ValueError(msg)
    times, counts = np.unique(sample, return_counts=True)
    # integer counts over n keep equal probabilities bit-identical across samples
    values = np.cumsum(counts) / sample.size
    return StepFn(times, values, kind="cdf")


def from_masses(
    locations: ArrayLike,
    masses: ArrayLike,
    value_before_first: float = 0.0,
    kind: Optional[str] = None,
) -> StepFn:
    """
    Build a right-continuous StepFn by accumulating point masses.

    Masses placed at coincident locations are summed into a single jump.
    """
    locations = np.asarray(locations, dtype=float).ravel()
    masses = np.asarray(masses, dtype=float).ravel()
    if locations.shape != masses.shape:
        msg = "locations and masses must have the same length"
        raise ValueError(msg)
    times, inverse = np.unique(locations, return_inverse=True)
    summed = np.bincount(inverse.ravel(), weights=masses, minlength=times.size)
    values = value_before_first + np.cumsum(summed)
    return StepFn(times, values, value_before_first=value_before_first, kind=kind)


def integrate_difference(f: StepFn, g: StepFn, lower: float = 0.0) -> float:
    """
    Return the exact integral of f - g over [lower, inf).

    Both functions are evaluated on the merged set of breakpoints and the
    piecewise-constant difference is summed segment by segment.

    Raises
    ------
    ValueError
        if f and g differ after their last breakpoints, in which case the
        integral is unbounded.
    """
    pts = np.union1d(f.breakpoints, g.breakpoints)
    left = np.concatenate([[lower], pts[pts > lower]])
    diff = np.asarray(f(left)) - np.asarray(g(left))
    if abs(diff[-1]) > _ONE_TOL:
        msg = (
            f"the functions differ by {diff[-1]} beyond their last breakpoint; "
            f"the integral of their difference is unbounded"
        )
        raise ValueError(msg)
    return float(np.sum(diff[:-1] * np.diff(left)))
