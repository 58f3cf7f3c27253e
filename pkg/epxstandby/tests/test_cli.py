import json

import numpy as np
import pandas as pd
import pytest
from scipy import optimize, stats

from epxstandby.cli import EXIT_ERROR, EXIT_OK, EXIT_REJECTED, main
from epxstandby.model import exp_system_cdf_closed_form, exp_system_mean
from epxstandby.utils import read_times


@pytest.fixture(scope="session")
def simulated(tmp_path_factory):
    out = tmp_path_factory.mktemp("simulated")
    args = ["simulate", "--config", "estimation_n50", "--seed", "5", "--out", str(out)]
    assert main(args) == EXIT_OK
    return out


def _write(path, values) -> str:
    path.write_text("time\n" + "".join(f"{v}\n" for v in values))
    return str(path)


def test_simulate_files(simulated) -> None:
    for name in ("hot.csv", "warm.csv", "systems.csv", "manifest.json"):
        assert (simulated / name).is_file()
    assert read_times(simulated / "hot.csv").size == 50
    assert read_times(simulated / "systems.csv").size == 50
    with open(simulated / "manifest.json") as f:
        manifest = json.load(f)
    assert manifest["m"] == 4
    assert manifest["seed"] == 5
    assert manifest["t1"] is None
    assert manifest["warm"] == {"family": "exponential", "rate": 0.5}


def test_simulate_is_reproducible(tmp_path) -> None:
    args = ["simulate", "--n", "5", "--m", "1", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("hot.csv", "warm.csv", "systems.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert read_times(tmp_path / "a" / "systems.csv").size == 5


def test_simulate_censored(tmp_path) -> None:
    args = ["simulate", "--n", "200", "--t1", "1.0", "--seed", "8", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    warm = read_times(tmp_path / "warm.csv")
    assert np.all(warm <= 1.0)
    with open(tmp_path / "manifest.json") as f:
        manifest = json.load(f)
    assert manifest["n2"] == 200
    assert manifest["m2"] == warm.size


def test_simulate_full_damage(tmp_path) -> None:
    args = ["simulate", "--n", "2000", "--p", "1", "--seed", "9", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    systems = read_times(tmp_path / "systems.csv")
    assert stats.kstest(systems, stats.expon.cdf).statistic < 0.05


def test_simulate_mean(tmp_path) -> None:
    assert main(["simulate", "--n", "100000", "--seed", "10", "--out", str(tmp_path)]) == EXIT_OK
    systems = read_times(tmp_path / "systems.csv")
    assert systems.mean() == pytest.approx(exp_system_mean(1.0, 0.5), rel=0.02)


def test_estimate_example(tmp_path, capsys) -> None:
    hot = _write(tmp_path / "hot.csv", [2.0])
    warm = _write(tmp_path / "warm.csv", [1.0])
    code = main(["estimate", "--hot", hot, "--warm", warm, "--m", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["r_hat"] == 2.0
    with open(tmp_path / "report.json") as f:
        report = json.load(f)
    assert report["r_hat"] == 2.0
    assert report["mu_hat"] == pytest.approx(2.0)


def test_estimate_empty_warm(tmp_path) -> None:
    hot = _write(tmp_path / "hot.csv", [1.0, 2.0, 3.0])
    warm = _write(tmp_path / "warm.csv", [])
    code = main(["estimate", "--hot", hot, "--warm", warm, "--m", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    with open(tmp_path / "report.json") as f:
        report = json.load(f)
    assert report["r_hat"] is None
    assert report["mu_hat"] == pytest.approx(2.0)
    code = main(["estimate", "--hot", hot, "--warm", warm, "--m", "2", "--out", str(tmp_path)])
    assert code == EXIT_ERROR


def test_estimate_four_units(simulated, tmp_path) -> None:
    args = [
        "estimate",
        "--hot",
        str(simulated / "hot.csv"),
        "--warm",
        str(simulated / "warm.csv"),
        "--manifest",
        str(simulated / "manifest.json"),
        "--m",
        "4",
        "--out",
        str(tmp_path),
    ]
    assert main(args) == EXIT_OK
    curves = pd.read_csv(tmp_path / "curves.csv")
    assert list(curves.columns) == ["time", "F1", "F2", "K2", "K3", "K4"]
    k = curves[["F1", "K2", "K3", "K4"]].to_numpy()
    assert np.all(np.diff(k, axis=1) <= 1e-12)
    assert np.all(np.diff(k, axis=0) >= 0)


def test_parse_error(tmp_path, capsys) -> None:
    hot = tmp_path / "hot.csv"
    hot.write_text("time\n1.0\nabc\n")
    warm = _write(tmp_path / "warm.csv", [1.0])
    code = main(["estimate", "--hot", str(hot), "--warm", warm, "--out", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "line 3" in capsys.readouterr().err


def test_gof(simulated, tmp_path, capsys) -> None:
    args = [
        "gof",
        "--systems",
        str(simulated / "systems.csv"),
        "--hot",
        str(simulated / "hot.csv"),
        "--warm",
        str(simulated / "warm.csv"),
        "--out",
        str(tmp_path / "gof.json"),
    ]
    code = main(args)
    result = json.loads(capsys.readouterr().out)
    assert result["threshold"] == pytest.approx(3.8415, abs=1e-4)
    assert code == (EXIT_REJECTED if result["reject"] else EXIT_OK)
    with open(tmp_path / "gof.json") as f:
        assert json.load(f) == result


@pytest.fixture(scope="session")
def null_quantiles(tmp_path_factory):
    # midpoint quantiles of the exponential null with n = n1 = n2 = 400
    out = tmp_path_factory.mktemp("null")
    u = (np.arange(400) + 0.5) / 400
    k2 = lambda t, level: exp_system_cdf_closed_form(1.0, 0.5, t) - level  # noqa: E731
    systems = [optimize.brentq(k2, 0.0, 50.0, args=(level,), xtol=1e-14) for level in u]
    _write(out / "systems.csv", systems)
    _write(out / "hot.csv", stats.expon.ppf(u))
    _write(out / "warm.csv", stats.expon.ppf(u, scale=2.0))
    return out


def test_gof_null_regression(null_quantiles, tmp_path, capsys) -> None:
    args = ["gof"] + [
        f"--{name}={null_quantiles / f'{name}.csv'}" for name in ("systems", "hot", "warm")
    ]
    assert main(args + ["--out", str(tmp_path / "a.json")]) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["hypothesis"] == "h0star"
    assert result["reject"] is False
    assert result["yn2"] < 0.5
    assert result["p_value"] > 0.4
    assert main(args + ["--out", str(tmp_path / "b.json")]) == EXIT_OK
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_gof_rejects(tmp_path) -> None:
    args = ["simulate", "--n", "400", "--p", "1", "--seed", "12", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    args = ["gof"] + [
        f"--{name}={tmp_path / f'{name}.csv'}" for name in ("systems", "hot", "warm")
    ]
    assert main(args) == EXIT_REJECTED


def test_gof_degenerate(tmp_path, capsys) -> None:
    systems = _write(tmp_path / "systems.csv", [2.0, 2.0, 2.0])
    hot = _write(tmp_path / "hot.csv", [1.0, 1.0, 1.0])
    warm = _write(tmp_path / "warm.csv", [2.0, 2.0, 2.0])
    code = main(["gof", "--systems", systems, "--hot", hot, "--warm", warm])
    assert code == EXIT_ERROR
    assert "variance" in capsys.readouterr().err


def test_mc_level_config(tmp_path) -> None:
    args = ["mc-level", "--config", "level_study", "--reps", "2", "--quiet", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    report = pd.read_csv(tmp_path / "report.csv")
    assert list(report["n"]) == [50, 100, 170, 200, 400]
    assert list(report["replications"]) == [2] * 5


def test_mc_level_deterministic(tmp_path) -> None:
    base = ["mc-level", "--n", "20", "--reps", "30", "--seed", "4", "--quiet", "--trace"]
    assert main(base + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(base + ["--parallelism", "8", "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("report.csv", "report.json", "trace.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_mc_power(tmp_path) -> None:
    args = [
        "mc-power",
        "--n",
        "20",
        "40",
        "--p",
        "0",
        "0.5",
        "--reps",
        "4",
        "--quiet",
        "--out",
        str(tmp_path),
    ]
    assert main(args) == EXIT_OK
    report = pd.read_csv(tmp_path / "report.csv")
    assert len(report) == 4
    assert not (tmp_path / "trace.csv").exists()


def test_plot_html(simulated, tmp_path) -> None:
    args = [
        "estimate",
        "--hot",
        str(simulated / "hot.csv"),
        "--warm",
        str(simulated / "warm.csv"),
        "--m",
        "3",
        "--out",
        str(tmp_path),
    ]
    assert main(args) == EXIT_OK
    out = tmp_path / "curves.html"
    code = main(["plot", "--curves", str(tmp_path / "curves.csv"), "--out", str(out)])
    assert code == EXIT_OK
    assert "<html" in out.read_text()
    code = main(
        ["plot", "--curves", str(tmp_path / "curves.csv"), "--out", str(out), "--columns", "K9"]
    )
    assert code == EXIT_ERROR


def test_plot_svg(tmp_path) -> None:
    pytest.importorskip("kaleido")
    curves = tmp_path / "curves.csv"
    curves.write_text("time,F1\n0.5,0.25\n1.0,0.5\n2.0,1.0\n")
    out = tmp_path / "curves.svg"
    assert main(["plot", "--curves", str(curves), "--out", str(out)]) == EXIT_OK
    assert "<svg" in out.read_text()


def test_plot_bad_suffix(tmp_path) -> None:
    curves = tmp_path / "curves.csv"
    curves.write_text("time,F1\n0.5,0.25\n1.0,1.0\n")
    code = main(["plot", "--curves", str(curves), "--out", str(tmp_path / "curves.png")])
    assert code == EXIT_ERROR
