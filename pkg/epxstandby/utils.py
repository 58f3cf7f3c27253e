"""
flat-file input and output, and environment configuration
"""

import json
import math
import os
from pathlib import Path
from typing import Dict, Union
import numpy as np
import pandas as pd

__all__ = [
    "DEFAULT_SEED",
    "SampleParseError",
    "read_times",
    "write_times",
    "read_curves",
    "write_json",
    "json_safe",
    "default_seed",
    "load_config",
]

DEFAULT_SEED = 20070601

pkg_data_dir = Path(__file__).parent / "data"


class SampleParseError(ValueError):
    """
    raised for a malformed sample file; `line` is the 1-based line number
    """

    def __init__(self, msg, fname=None, line=None):
        super().__init__(msg)
        self.fname = fname
        self.line = line


def read_times(fname: Union[str, Path], allow_empty: bool = True) -> np.ndarray:
    """
    Load a sample of failure times.

    Parameters
    ----------
    fname : str or path object
        a csv file with the single header ``time`` and one positive value per
        row

    allow_empty : bool
        whether a file with a header and no rows is accepted

    Returns
    -------
    times : numpy.ndarray
        the failure times in file order

    Raises
    ------
    FileNotFoundError
        if `fname` does not exist

    SampleParseError
        naming the first offending line
    """
    fname = Path(fname)
    if not fname.is_file():
        msg = f"sample file not found: {fname}"
        raise FileNotFoundError(msg)

    try:
        df = pd.read_csv(fname, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        df = pd.DataFrame({"time": []})
    except pd.errors.ParserError as err:
        msg = f"{fname}: {err}"
        raise SampleParseError(msg, fname=fname) from err

    if list(df.columns) != ["time"]:
        msg = f"{fname}, line 1: expected the single header 'time', got {list(df.columns)}"
        raise SampleParseError(msg, fname=fname, line=1)

    values = pd.to_numeric(df["time"], errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values) | (values <= 0)
    if np.any(bad):
        row = int(np.argmax(bad))
        line = row + 2
        msg = (
            f"{fname}, line {line}: expected a positive failure time, got "
            f"{df['time'].iloc[row]!r}"
        )
        raise SampleParseError(msg, fname=fname, line=line)
    if values.size == 0 and not allow_empty:
        msg = f"{fname}: the sample is empty"
        raise SampleParseError(msg, fname=fname)
    return values


def write_times(fname: Union[str, Path], times) -> None:
    """
    write failure times with the header ``time`` and LF line endings
    """
    df = pd.DataFrame({"time": np.asarray(times, dtype=float).ravel()})
    df.to_csv(fname, index=False, lineterminator="\n")


def read_curves(fname: Union[str, Path]) -> pd.DataFrame:
    """
    Load curves written by ``estimate``: a ``time`` column and one column per
    curve.
    """
    fname = Path(fname)
    if not fname.is_file():
        msg = f"curve file not found: {fname}"
        raise FileNotFoundError(msg)
    try:
        df = pd.read_csv(fname)
    except pd.errors.EmptyDataError:
        df = pd.DataFrame()
    if "time" not in df.columns:
        msg = f"{fname}, line 1: the curve file has no 'time' column"
        raise SampleParseError(msg, fname=fname, line=1)
    if len(df.columns) < 2 or len(df) == 0:
        msg = f"{fname}: the curve file has no curves"
        raise ValueError(msg)
    return df


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    msg = f"object of type {type(obj).__name__} is not JSON serializable"
    raise TypeError(msg)


def json_safe(obj):
    """
    replace non-finite floats by None, recursively
    """
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {key: json_safe(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(val) for val in obj]
    return obj


def write_json(fname: Union[str, Path], obj: Dict) -> None:
    """
    write `obj` as indented JSON, non-finite floats become null
    """
    with open(fname, "w", newline="\n") as f:
        json.dump(json_safe(obj), f, indent=2, default=_json_default)
        f.write("\n")


def default_seed(**params) -> int:
    """
    Return the master seed.

    An explicit ``seed`` keyword wins, then the ``EPX_STANDBY_SEED``
    environment variable, then ``DEFAULT_SEED``.

    Examples
    --------
    >>> default_seed(seed=7)
    7
    """
    seed = params.get("seed")
    if seed is not None:
        return int(seed)
    env_seed = os.getenv("EPX_STANDBY_SEED")
    if env_seed is not None:
        try:
            return int(env_seed)
        except ValueError as err:
            msg = f"EPX_STANDBY_SEED must be an integer, got {env_seed!r}"
            raise ValueError(msg) from err
    return DEFAULT_SEED


def load_config(name: Union[str, Path]) -> Dict:
    """
    Load a JSON study configuration.

    Parameters
    ----------
    name : str or path object
        a path to a JSON file, or the name of a bundled configuration
        (``level_study``, ``power_study``, ``estimation_n50``, ``estimation_n100``)

    Examples
    --------
    >>> load_config("level_study")["n_grid"]
    [50, 100, 170, 200, 400]
    """
    path = Path(name)
    if not path.is_file():
        path = pkg_data_dir / f"{name}.json"
    if not path.is_file():
        available = sorted(p.stem for p in pkg_data_dir.glob("*.json"))
        msg = f"config {name} not found; bundled configs are {available}"
        raise FileNotFoundError(msg)
    with open(path) as f:
        try:
            config = json.load(f)
        except json.JSONDecodeError as err:
            msg = f"{path}, line {err.lineno}: {err.msg}"
            raise ValueError(msg) from err
    if not isinstance(config, dict):
        msg = f"{path}: a config must be a JSON object"
        raise ValueError(msg)
    config.pop("_comment", None)
    return config
