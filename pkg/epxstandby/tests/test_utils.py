import numpy as np
import pytest

from epxstandby.utils import (
    DEFAULT_SEED,
    SampleParseError,
    default_seed,
    json_safe,
    load_config,
    read_curves,
    read_times,
    write_json,
    write_times,
)


def test_read_times(tmp_path) -> None:
    fname = tmp_path / "hot.csv"
    fname.write_text("time\n1.5\n0.25\n3\n")
    np.testing.assert_array_equal(read_times(fname), [1.5, 0.25, 3.0])


def test_read_times_empty(tmp_path) -> None:
    fname = tmp_path / "warm.csv"
    fname.write_text("time\n")
    assert read_times(fname).size == 0
    with pytest.raises(SampleParseError):
        read_times(fname, allow_empty=False)


@pytest.mark.parametrize(
    "text, line",
    [
        ("time\n1.0\nabc\n", 3),
        ("time\n1.0\n2.0\n-4.0\n", 4),
        ("time\n0\n", 2),
        ("t\n1.0\n", 1),
        ("time\n1.0\n\n2.0\n", 3),
    ],
)
def test_read_times_reports_line(tmp_path, text: str, line: int) -> None:
    fname = tmp_path / "bad.csv"
    fname.write_text(text)
    with pytest.raises(SampleParseError) as err:
        read_times(fname)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_read_times_missing(tmp_path) -> None:
    with pytest.raises(FileNotFoundError):
        read_times(tmp_path / "missing.csv")


def test_write_times(tmp_path) -> None:
    fname = tmp_path / "out.csv"
    write_times(fname, [2.0, 0.5])
    assert fname.read_bytes() == b"time\n2.0\n0.5\n"
    np.testing.assert_array_equal(read_times(fname), [2.0, 0.5])


def test_read_curves(tmp_path) -> None:
    fname = tmp_path / "curves.csv"
    fname.write_text("time,F1,K2\n1.0,0.5,0.25\n2.0,1.0,1.0\n")
    assert list(read_curves(fname).columns) == ["time", "F1", "K2"]
    fname.write_text("t,F1\n1.0,0.5\n")
    with pytest.raises(SampleParseError):
        read_curves(fname)
    fname.write_text("time\n1.0\n")
    with pytest.raises(ValueError):
        read_curves(fname)


def test_json_safe(tmp_path) -> None:
    obj = {"a": np.inf, "b": [1.0, np.nan], "c": {"d": 2}}
    assert json_safe(obj) == {"a": None, "b": [1.0, None], "c": {"d": 2}}
    fname = tmp_path / "out.json"
    write_json(fname, {"x": np.float64(1.5), "y": float("inf")})
    assert fname.read_text() == '{\n  "x": 1.5,\n  "y": null\n}\n'


def test_default_seed(monkeypatch) -> None:
    monkeypatch.delenv("EPX_STANDBY_SEED", raising=False)
    assert default_seed() == DEFAULT_SEED
    assert default_seed(seed=None) == DEFAULT_SEED
    monkeypatch.setenv("EPX_STANDBY_SEED", "99")
    assert default_seed() == 99
    assert default_seed(seed=7) == 7
    monkeypatch.setenv("EPX_STANDBY_SEED", "abc")
    with pytest.raises(ValueError):
        default_seed()


def test_load_config(tmp_path) -> None:
    config = load_config("power_study")
    assert config["p_grid"] == [0.1, 0.25, 0.5, 0.75]
    assert "_comment" not in config
    assert load_config("estimation_n100")["m"] == 4

    fname = tmp_path / "study.json"
    fname.write_text('{"replications": 10, "n_grid": [20]}')
    assert load_config(fname) == {"replications": 10, "n_grid": [20]}
    fname.write_text('{"replications": 10,\n "n_grid": [20}')
    with pytest.raises(ValueError) as err:
        load_config(fname)
    assert "line 2" in str(err.value)
    with pytest.raises(FileNotFoundError):
        load_config("table9")
