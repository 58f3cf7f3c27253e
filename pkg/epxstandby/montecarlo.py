"""
seeded replication studies of the level and power of the goodness-of-fit tests
"""

import math
import time
from dataclasses import asdict, dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
from warnings import warn as warning
import numpy as np
import pandas as pd

from .distributions import Exponential, Weibull
from .gof import (
    H0STAR,
    HYPOTHESES,
    DegenerateVarianceError,
    DensityFloorError,
    GofData,
    run_test,
)
from .model import ScaleAFT, StandbyModel, SystemConfig, make_rng, simulate_system
from .utils import DEFAULT_SEED, write_json

__all__ = [
    "DEFAULT_SEED",
    "McConfig",
    "McCell",
    "McReport",
    "derive_seed",
    "run_study",
    "mc_significance",
    "mc_power",
]

# replications handed to a worker at a time
_CHUNK = 50

REPORT_COLUMNS = ["n", "p", "replications", "rejections", "failures", "rate", "se"]


@dataclass(frozen=True)
class McConfig(object):
    """
    Settings of a replication study.

    Hot lifetimes follow an exponential law with rate `rate` (or a Weibull
    law with shape `shape` and scale 1 / rate); warm lifetimes follow the
    same law on the time scale r; systems have one main and one stand-by unit.

    Parameters
    ----------
    replications : int
        replications per (n, p) cell

    n : int
        number of systems, and of hot and warm units unless `n1` / `n2` are set

    damage_p : float
        probability of switch damage for single-cell studies

    master_seed : int
        every replication stream is derived from this seed and the
        replication index

    parallelism : int
        number of worker processes
    """

    replications: int = 3000
    n: int = 100
    n1: Optional[int] = None
    n2: Optional[int] = None
    rate: float = 1.0
    r: float = 0.5
    damage_p: float = 0.0
    alpha: float = 0.05
    hypothesis: str = H0STAR
    master_seed: int = DEFAULT_SEED
    parallelism: int = field(default=1, compare=False)
    family: str = "exponential"
    shape: float = 1.0
    m: int = 2
    t1: float = math.inf

    def __post_init__(self):
        if int(self.replications) != self.replications or self.replications < 1:
            msg = f"replications must be a positive integer, got {self.replications}"
            raise ValueError(msg)
        if int(self.parallelism) != self.parallelism or self.parallelism < 1:
            msg = f"parallelism must be a positive integer, got {self.parallelism}"
            raise ValueError(msg)
        if self.hypothesis not in HYPOTHESES:
            msg = f"hypothesis={self.hypothesis} is not one of {HYPOTHESES}"
            raise ValueError(msg)
        # the variance estimates need two units in every sample
        for name in ("n", "n1", "n2"):
            size = getattr(self, name)
            if size is not None and (int(size) != size or size < 2):
                msg = f"{name} must be an integer >= 2, got {size}"
                raise ValueError(msg)
        if self.family not in ("exponential", "weibull"):
            msg = f"family={self.family} is not one of 'exponential', 'weibull'"
            raise ValueError(msg)
        if self.m != 2:
            msg = f"the tests apply to systems with one stand-by unit (m=2), got m={self.m}"
            raise ValueError(msg)
        if not math.isinf(self.t1):
            msg = f"the tests need complete samples (t1=inf), got t1={self.t1}"
            raise ValueError(msg)
        if not 0.0 < self.alpha < 0.5:
            msg = f"alpha must lie in (0, 0.5), got {self.alpha}"
            raise ValueError(msg)

    @classmethod
    def from_dict(cls, params: Dict) -> "McConfig":
        """
        build a config from a mapping, ignoring keys that are not fields
        """
        names = cls.__dataclass_fields__.keys()
        kwargs = {key: val for key, val in params.items() if key in names and val is not None}
        if "t1" in kwargs:
            kwargs["t1"] = float(kwargs["t1"])
        return cls(**kwargs)

    def to_dict(self) -> Dict:
        out = asdict(self)
        # the worker count does not change results
        del out["parallelism"]
        out["t1"] = None if math.isinf(self.t1) else self.t1
        return out

    def hot_dist(self):
        if self.family == "weibull":
            return Weibull(self.shape, 1.0 / self.rate)
        return Exponential(self.rate)

    def standby_model(self, p: float) -> StandbyModel:
        return StandbyModel(self.hot_dist(), ScaleAFT(self.r), damage_p=p)


@dataclass(frozen=True)
class McCell(object):
    n: int
    p: float
    replications: int
    rejections: int
    failures: int

    @property
    def valid(self) -> int:
        return self.replications - self.failures

    @property
    def rate(self) -> float:
        if self.valid == 0:
            return math.nan
        return self.rejections / self.valid

    @property
    def se(self) -> float:
        if self.valid == 0:
            return math.nan
        return math.sqrt(self.rate * (1.0 - self.rate) / self.valid)

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "p": self.p,
            "replications": self.replications,
            "rejections": self.rejections,
            "failures": self.failures,
            "rate": self.rate,
            "se": self.se,
        }


@dataclass(frozen=True)
class McReport(object):
    """
    Rejection counts per (n, p) cell.

    Two reports compare equal when their cells and settings agree; the
    wall-clock time and the optional per-replication trace are ignored.
    """

    cells: Tuple[McCell, ...]
    config: McConfig
    elapsed_seconds: float = field(default=0.0, compare=False)
    trace: Optional[pd.DataFrame] = field(default=None, compare=False, repr=False)

    @property
    def rejection_rate(self) -> float:
        return self._single_cell().rate

    @property
    def standard_error(self) -> float:
        return self._single_cell().se

    def _single_cell(self) -> McCell:
        if len(self.cells) != 1:
            msg = f"the report has {len(self.cells)} cells; use cell() or to_frame()"
            raise ValueError(msg)
        return self.cells[0]

    def cell(self, n: int, p: float) -> McCell:
        for cell in self.cells:
            if cell.n == n and cell.p == p:
                return cell
        msg = f"no cell with n={n}, p={p}"
        raise KeyError(msg)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([cell.to_dict() for cell in self.cells], columns=REPORT_COLUMNS)

    def to_csv(self, fname: Union[str, Path]):
        self.to_frame().to_csv(fname, index=False, lineterminator="\n")

    def to_dict(self) -> Dict:
        return {
            "master_seed": self.config.master_seed,
            "config": self.config.to_dict(),
            "cells": [cell.to_dict() for cell in self.cells],
        }

    def to_json(self, fname: Union[str, Path]):
        """
        write the report without the wall-clock time so reruns are identical
        """
        write_json(fname, self.to_dict())


def derive_seed(master_seed: int, index: int) -> int:
    """
    Return the seed of replication `index`.

    The seed is drawn from a ``numpy.random.SeedSequence`` spawned with the
    replication index as its key, so distinct indices give independent
    streams and the result does not depend on which worker runs it.

    Examples
    --------
    >>> derive_seed(1, 0) == derive_seed(1, 0)
    True
    >>> derive_seed(1, 0) == derive_seed(1, 1)
    False
    """
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _replicate(config: McConfig, n: int, p: float, index: int) -> Dict:
    rng = make_rng(derive_seed(config.master_seed, index))
    model = config.standby_model(p)
    n1 = config.n1 or n
    n2 = config.n2 or n
    hot = model.hot.sample(rng, n1)
    warm = model.warm.sample(rng, n2)
    systems = simulate_system(rng, SystemConfig(2, model), size=n)
    row = {"n": n, "p": p, "replication": index}
    try:
        result = run_test(GofData(systems, hot, warm), config.hypothesis, config.alpha)
    except (DegenerateVarianceError, DensityFloorError) as err:
        row.update(x_stat=math.nan, sigma2_hat=math.nan, yn2=math.nan, reject=False)
        row.update(failed=True, error=str(err))
        return row
    row.update(
        x_stat=result.x_stat,
        sigma2_hat=result.sigma2_hat,
        yn2=result.yn2,
        reject=result.reject,
        failed=False,
        error="",
    )
    return row


def _run_chunk(task) -> List[Dict]:
    config, n, p, start, stop = task
    return [_replicate(config, n, p, i) for i in range(start, stop)]


def run_study(
    config: McConfig,
    n_grid: Optional[Sequence[int]] = None,
    p_grid: Optional[Sequence[float]] = None,
    trace: bool = False,
    progress: Optional[Callable[[int, int], None]] = None,
) -> McReport:
    """
    Run `config.replications` tests in every (n, p) cell.

    Replication i uses the same seed in every cell, so cells differ only in
    n and p. Results are independent of `config.parallelism`.

    Parameters
    ----------
    config : McConfig

    n_grid : sequence of int, optional
        system sample sizes, ``[config.n]`` by default

    p_grid : sequence of float, optional
        switch damage probabilities, ``[config.damage_p]`` by default

    trace : bool
        keep one row per replication in ``McReport.trace``

    progress : callable, optional
        called as progress(done, total) after each chunk of replications

    Returns
    -------
    report : McReport
    """
    n_grid = [config.n] if n_grid is None else [int(n) for n in n_grid]
    p_grid = [config.damage_p] if p_grid is None else [float(p) for p in p_grid]
    for p in p_grid:
        if not 0.0 <= p <= 1.0:
            msg = f"damage probabilities must lie in [0, 1], got {p}"
            raise ValueError(msg)
    for n in n_grid:
        if n < 2:
            msg = f"sample sizes must be at least 2, got {n}"
            raise ValueError(msg)

    tasks = [
        (config, n, p, start, min(start + _CHUNK, config.replications))
        for n in n_grid
        for p in p_grid
        for start in range(0, config.replications, _CHUNK)
    ]
    total = len(n_grid) * len(p_grid) * config.replications

    t0 = time.perf_counter()
    rows = []
    if config.parallelism == 1:
        chunks = map(_run_chunk, tasks)
        for chunk in chunks:
            rows.extend(chunk)
            if progress is not None:
                progress(len(rows), total)
    else:
        with Pool(config.parallelism) as pool:
            for chunk in pool.imap_unordered(_run_chunk, tasks):
                rows.extend(chunk)
                if progress is not None:
                    progress(len(rows), total)
    elapsed = time.perf_counter() - t0

    frame = pd.DataFrame(rows).sort_values(["n", "p", "replication"], ignore_index=True)
    cells = []
    for n in n_grid:
        for p in p_grid:
            sub = frame[(frame["n"] == n) & (frame["p"] == p)]
            cells.append(
                McCell(
                    n=n,
                    p=p,
                    replications=len(sub),
                    rejections=int(sub["reject"].sum()),
                    failures=int(sub["failed"].sum()),
                )
            )

    failures = sum(cell.failures for cell in cells)
    if failures > 0:
        warning(f"{failures} of {total} replications failed and were not counted")
    return McReport(
        cells=tuple(cells),
        config=config,
        elapsed_seconds=elapsed,
        trace=frame if trace else None,
    )


def mc_significance(
    config: McConfig,
    n_grid: Optional[Sequence[int]] = None,
    trace: bool = False,
    progress: Optional[Callable[[int, int], None]] = None,
) -> McReport:
    """
    Estimate the rejection rate under the null hypothesis for each n.
    """
    if config.damage_p != 0:
        msg = f"the significance level is estimated with damage_p = 0, got {config.damage_p}"
        raise ValueError(msg)
    return run_study(config, n_grid, [0.0], trace=trace, progress=progress)


def mc_power(
    config: McConfig,
    n_grid: Optional[Sequence[int]] = None,
    p_grid: Optional[Sequence[float]] = None,
    trace: bool = False,
    progress: Optional[Callable[[int, int], None]] = None,
) -> McReport:
    """
    Estimate the rejection rate under switch damage for each (n, p).

    A p = 0 cell reproduces ``mc_significance`` exactly.
    """
    return run_study(config, n_grid, p_grid, trace=trace, progress=progress)
