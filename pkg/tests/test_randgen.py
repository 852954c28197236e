import numpy as np
import pytest
from scipy import stats

from orliczsketch.orlicz import make_orlicz
from orliczsketch.randgen import (SeedSpec, as_generator, sample_gaussian,
                                  sample_generalized_exponential, sample_p_stable)


def test_seedspec_validation():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(2 ** 64)
    with pytest.raises(ValueError):
        SeedSpec(0, -2)


def test_equal_specs_give_identical_streams():
    a = SeedSpec(42, 3).generator(1, 2).standard_normal(1000)
    b = SeedSpec(42, 3).generator(1, 2).standard_normal(1000)
    assert np.array_equal(a, b)


def test_distinct_streams_differ_and_look_independent():
    a = SeedSpec(42, 0).generator().standard_normal(20000)
    b = SeedSpec(42, 1).generator().standard_normal(20000)
    c = SeedSpec(42, 0).generator(7).standard_normal(20000)
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.03
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.03


def test_as_generator_accepts_common_forms():
    g = np.random.default_rng(0)
    assert as_generator(g) is g
    x = as_generator(5).random(3)
    y = as_generator(SeedSpec(5)).random(3)
    assert np.array_equal(x, y)
    with pytest.raises(TypeError):
        as_generator("seed")


@pytest.mark.parametrize("p,median", [(1, np.log(2)), (2, np.sqrt(np.log(2)))])
def test_generalized_exponential_power_medians(p, median):
    u = sample_generalized_exponential(make_orlicz("power", p), SeedSpec(1), 100_000)
    assert np.median(u) == pytest.approx(median, abs=0.01)


def test_generalized_exponential_huber_ks():
    g = make_orlicz("huber", 0.75)
    u = sample_generalized_exponential(g, SeedSpec(2), 100_000)
    ks = stats.kstest(u, lambda t: 1 - np.exp(-g.eval(t))).statistic
    assert ks < 0.01


def test_generalized_exponential_is_inverse_of_exponential_stream():
    g = make_orlicz("l1l2")
    u = sample_generalized_exponential(g, SeedSpec(9).generator(), 50)
    e = SeedSpec(9).generator().standard_exponential(50)
    assert np.allclose(g.eval(u), e, rtol=1e-10)


def test_cauchy_quartiles_and_median():
    x = sample_p_stable(1.0, SeedSpec(3), 100_000)
    q1, q2, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    assert q1 == pytest.approx(-1, abs=0.02)
    assert q3 == pytest.approx(1, abs=0.02)
    assert q2 == pytest.approx(0, abs=0.02)


def test_p_stable_two_gives_variance_two_gaussian():
    x = sample_p_stable(2.0, SeedSpec(4), 200_000)
    assert np.var(x) == pytest.approx(2.0, rel=0.02)
    assert stats.kstest(x / np.sqrt(2), "norm").statistic < 0.01


def test_p_stable_stability_at_1_5():
    p = 1.5
    n = 100_000
    x1 = sample_p_stable(p, SeedSpec(5, 0), n)
    x2 = sample_p_stable(p, SeedSpec(5, 1), n)
    base = sample_p_stable(p, SeedSpec(5, 2), n)
    combined = (x1 + x2) / 2 ** (1 / p)
    assert stats.ks_2samp(combined, base).statistic < 0.02


@pytest.mark.parametrize("p", [0.9, 2.1])
def test_p_stable_rejects_out_of_range(p):
    with pytest.raises(ValueError):
        sample_p_stable(p, SeedSpec(0), 10)


def test_gaussian_moments():
    x = sample_gaussian(SeedSpec(6), 1_000_000)
    assert abs(x.mean()) < 0.01
    assert x.var() == pytest.approx(1.0, rel=0.01)
