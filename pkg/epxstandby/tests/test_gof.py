import os

import numpy as np
import pytest
from scipy import integrate, stats

from epxstandby.distributions import Exponential, Weibull
from epxstandby.gof import (
    H0,
    H0STAR,
    DegenerateVarianceError,
    DensityFloorError,
    GofData,
    chat,
    decision,
    fhat2_curve,
    fhat2_plugin,
    ghat_h0,
    kernel_density,
    rhat_moments,
    run_test,
    sigma2_h0,
    sigma2_h0star,
    silverman_bandwidth,
    statistic_x,
    x_stat_h0star_closed_form,
)
from epxstandby.model import ScaleAFT, StandbyModel, SystemConfig, make_rng, simulate_system
from epxstandby.stepfn import ecdf

slow = pytest.mark.skipif(
    not os.getenv("EPX_STANDBY_SLOW"), reason="set EPX_STANDBY_SLOW=1 to run"
)


def _null_data(seed: int, n: int, n1=None, n2=None, p: float = 0.0, hot_law=None) -> GofData:
    hot_law = Exponential(1.0) if hot_law is None else hot_law
    model = StandbyModel(hot_law, ScaleAFT(0.5), damage_p=p)
    rng = make_rng(seed)
    hot = model.hot.sample(rng, n1 or n)
    warm = model.warm.sample(rng, n2 or n)
    systems = simulate_system(rng, SystemConfig(2, model), size=n)
    return GofData(systems, hot, warm)


@pytest.fixture(scope="session")
def balanced_data() -> GofData:
    # r = 0.5 and r * max(hot) <= min(hot), systems mean equal to 1.5 * mean(hot)
    return GofData([2.0, 2.5, 3.5, 4.0], [1.5, 2.5], [3.0, 5.0])


def test_data_validation() -> None:
    with pytest.raises(ValueError):
        GofData([], [1.0], [1.0])
    with pytest.raises(ValueError):
        GofData([1.0], [0.0], [1.0])
    data = GofData([2.0, 1.0], [1.0], [3.0, 1.0, 2.0])
    assert (data.n, data.n1, data.n2) == (2, 1, 3)
    np.testing.assert_array_equal(data.systems, [1.0, 2.0])


def test_ghat_h0() -> None:
    hot, warm = [1.0, 2.0, 3.0], [2.0, 4.0, 6.0]
    assert ghat_h0(hot, warm, 4.0) == 2.0
    assert ghat_h0(hot, warm, 1.0) == 0.0
    assert ghat_h0(hot, warm, 6.0) == 3.0


def test_rhat_moments() -> None:
    assert rhat_moments([1.0, 2.0], [10.0, 30.0]) == pytest.approx(0.075)
    assert rhat_moments([2.0, 4.0], [2.0, 4.0]) == 1.0


def test_fhat2_plugin() -> None:
    half = lambda y: 0.5 * np.asarray(y)  # noqa: E731
    assert fhat2_plugin(2.0, [1.0, 2.0], half) == 0.5
    assert fhat2_plugin(0.5, [1.0, 2.0], half) == 0.0
    # with ghat(y) = y the plug-in is the distribution of the larger of two hot draws
    hot = np.array([1.0, 2.0, 4.0])
    t = np.array([0.5, 1.0, 2.0, 3.0, 4.0])
    identity = lambda y: np.asarray(y)  # noqa: E731
    np.testing.assert_allclose(fhat2_plugin(t, hot, identity), ecdf(hot)(t) ** 2)


def test_fhat2_curve_matches_plugin() -> None:
    rng = make_rng(71)
    hot = np.sort(rng.exponential(size=12))
    ghat = lambda y: 0.4 * np.asarray(y)  # noqa: E731
    curve = fhat2_curve(hot, ghat(hot))
    assert curve.reaches_one()
    assert np.all(np.diff(curve.values) >= -1e-12)
    pts = curve.breakpoints
    t = np.concatenate([[0.5 * pts[0]], 0.5 * (pts[1:] + pts[:-1]), [pts[-1] + 1.0]])
    np.testing.assert_allclose(curve(t), fhat2_plugin(t, hot, ghat), atol=1e-12)


def test_statistic_zero(balanced_data: GofData) -> None:
    assert abs(statistic_x(balanced_data, H0STAR)) < 1e-12
    assert abs(x_stat_h0star_closed_form(balanced_data)) < 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_statistic_closed_form(seed: int) -> None:
    rng = make_rng(seed)
    data = GofData(
        rng.exponential(size=int(rng.integers(1, 30))),
        rng.exponential(size=int(rng.integers(1, 30))),
        rng.exponential(scale=2.0, size=int(rng.integers(1, 30))),
    )
    assert statistic_x(data, H0STAR) == pytest.approx(x_stat_h0star_closed_form(data), abs=1e-10)


def test_statistic_no_clipping() -> None:
    rng = make_rng(73)
    data = GofData(
        rng.exponential(size=25),
        rng.uniform(1.0, 1.5, size=20),
        rng.uniform(3.0, 4.0, size=15),
    )
    r_hat = rhat_moments(data.hot, data.warm)
    expected = np.sqrt(data.n) * ((2.0 - r_hat) * data.hot.mean() - data.systems.mean())
    assert statistic_x(data, H0STAR) == pytest.approx(expected, abs=1e-10)


def test_statistic_h0_identical_units() -> None:
    rng = make_rng(79)
    hot = rng.exponential(size=15)
    systems = rng.exponential(size=10)
    data = GofData(systems, hot, hot)
    expected_mean = np.maximum(hot[:, None], hot[None, :]).mean()
    expected = np.sqrt(data.n) * (expected_mean - systems.mean())
    assert statistic_x(data, H0) == pytest.approx(expected, abs=1e-10)


def test_statistic_scale_invariant() -> None:
    data = _null_data(83, 60)
    a = 4.0
    scaled = data.scaled(a)
    for hypothesis in (H0, H0STAR):
        assert statistic_x(scaled, hypothesis) == pytest.approx(
            a * statistic_x(data, hypothesis), rel=1e-9
        )
    assert sigma2_h0star(scaled) == pytest.approx(a ** 2 * sigma2_h0star(data), rel=1e-9)
    assert run_test(scaled).yn2 == pytest.approx(run_test(data).yn2, rel=1e-9)


def test_chat() -> None:
    assert chat([1.0, 2.0], [2.0, 4.0], 3.0) == pytest.approx(1 / 3)
    assert chat([1.0, 2.0], [0.5, 0.5], 0.5) == 0.0
    assert chat([1.0], [2.0], 2.0) == pytest.approx(0.5)


def test_sigma2_h0star_lower_bound() -> None:
    data = _null_data(89, 50)
    sigma2 = sigma2_h0star(data)
    assert sigma2 >= np.var(data.systems) - 1e-12
    assert sigma2 > 0


def test_sigma2_degenerate() -> None:
    data = GofData([2.0, 2.0, 2.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0])
    with pytest.raises(DegenerateVarianceError):
        sigma2_h0star(data)
    with pytest.raises(DegenerateVarianceError):
        sigma2_h0(data)
    with pytest.raises(DegenerateVarianceError):
        run_test(data)


def test_sigma2_small_samples() -> None:
    with pytest.raises(ValueError):
        sigma2_h0star(GofData([1.0, 2.0], [1.0], [2.0, 3.0]))


def test_sigma2_h0() -> None:
    data = _null_data(97, 80)
    sigma2 = sigma2_h0(data)
    assert sigma2 >= np.var(data.systems) - 1e-12
    fixed = sigma2_h0(data, bandwidth_rule=silverman_bandwidth(data.hot))
    assert fixed == pytest.approx(sigma2)
    assert sigma2_h0(data, bandwidth_rule=silverman_bandwidth) == pytest.approx(sigma2)


def test_density_floor() -> None:
    data = GofData([2.0, 3.0, 5.0, 6.0], [1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0])
    with pytest.raises(DensityFloorError) as err:
        sigma2_h0(data, bandwidth_rule=0.01)
    assert err.value.point == 0.0


def test_kernel_density() -> None:
    assert kernel_density([0.0], 0.0, 1.0) == pytest.approx(1 / np.sqrt(2 * np.pi))
    sample = make_rng(101).exponential(size=40)
    x = np.linspace(-5.0, 15.0, 4001)
    dens = kernel_density(sample, x, 0.3)
    assert integrate.trapezoid(dens, x) == pytest.approx(1.0, abs=1e-3)
    mirrored = kernel_density([1.0, 3.0], 2.5, 0.5)
    assert kernel_density([1.0, 3.0], 1.5, 0.5) == pytest.approx(mirrored)
    with pytest.raises(ValueError):
        kernel_density(sample, 0.0, 0.0)


def test_silverman_bandwidth() -> None:
    sample = make_rng(103).normal(size=100)
    expected = 1.06 * np.std(sample, ddof=1) * 100 ** (-0.2)
    assert silverman_bandwidth(sample) == pytest.approx(expected)
    with pytest.raises(DegenerateVarianceError):
        silverman_bandwidth([1.0, 1.0])


def test_decision() -> None:
    threshold, p_value, reject = decision(0.0, 0.05)
    assert threshold == pytest.approx(3.8415, abs=1e-4)
    assert p_value == 1.0
    assert not reject
    # rejection needs a strictly larger statistic
    assert not decision(threshold, 0.05)[2]
    assert decision(threshold + 1e-9, 0.05)[2]
    assert decision(10.0, 0.05)[1] == pytest.approx(stats.chi2.sf(10.0, 1))
    with pytest.raises(ValueError):
        decision(1.0, 0.6)


def test_run_test_balanced(balanced_data: GofData) -> None:
    result = run_test(balanced_data)
    assert result.hypothesis == H0STAR
    assert abs(result.yn2) < 1e-20
    assert not result.reject
    assert result.threshold == pytest.approx(3.8415, abs=1e-4)


@pytest.mark.parametrize("hypothesis", [H0, H0STAR])
def test_run_test_consistent(hypothesis: str) -> None:
    data = _null_data(107, 400)
    result = run_test(data, hypothesis, alpha=0.05)
    assert result.yn2 == pytest.approx(result.x_stat ** 2 / result.sigma2_hat)
    assert result.reject == (result.yn2 > result.threshold)
    assert result.p_value == pytest.approx(stats.chi2.sf(result.yn2, 1))
    assert set(result.to_dict()) == {
        "hypothesis",
        "x_stat",
        "sigma2_hat",
        "yn2",
        "alpha",
        "threshold",
        "p_value",
        "reject",
    }
    with pytest.raises(ValueError):
        run_test(data, "h1")


def test_run_test_detects_strong_damage() -> None:
    data = _null_data(109, 400, p=1.0)
    result = run_test(data)
    assert result.x_stat > 0
    assert result.reject


@slow
def test_statistic_is_chi_squared_under_null() -> None:
    yn2 = [run_test(_null_data(10_000 + i, 400)).yn2 for i in range(2000)]
    assert stats.kstest(yn2, stats.chi2(1).cdf).pvalue > 0.01


@slow
def test_variance_estimate_calibrated() -> None:
    results = [run_test(_null_data(20_000 + i, 400)) for i in range(1000)]
    x = np.array([res.x_stat for res in results])
    sigma2 = np.array([res.sigma2_hat for res in results])
    assert np.mean(sigma2) == pytest.approx(np.var(x), rel=0.2)


@slow
def test_h0_variance_calibrated() -> None:
    hot_law = Weibull(1.5, 1.0)
    results = [run_test(_null_data(30_000 + i, 400, hot_law=hot_law), H0) for i in range(500)]
    x = np.array([res.x_stat for res in results])
    sigma2 = np.array([res.sigma2_hat for res in results])
    assert np.mean(sigma2) == pytest.approx(np.var(x), rel=0.3)
