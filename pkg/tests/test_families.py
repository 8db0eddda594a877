import math

import numpy as np
import pytest
from scipy import integrate

from expshrink.errors import ConfigurationError, DomainError
from expshrink.families import (
    EXPONENTIAL,
    FAMILIES,
    GAMMA,
    NORMAL_IID,
    FamilyTag,
    ParameterSpace,
    density,
    family,
    log_density,
    s_statistic,
    validate_parameter_space,
)

SUPPORT_GRID = {
    FamilyTag.NORMAL_IID: np.concatenate([-np.geomspace(1e-6, 1e6, 100), np.geomspace(1e-6, 1e6, 100)]),
    FamilyTag.NORMAL_CORRELATED: np.concatenate([-np.geomspace(1e-6, 1e6, 100), np.geomspace(1e-6, 1e6, 100)]),
    FamilyTag.GAMMA: np.geomspace(1e-8, 1e8, 200),
    # natural variable y = -x < 0
    FamilyTag.EXPONENTIAL: -np.geomspace(1e-8, 1e8, 200),
}


@pytest.mark.parametrize("tag", list(FamilyTag))
def test_b_prime_times_a_is_one(tag):
    fam = FAMILIES[tag]
    y = SUPPORT_GRID[tag]
    np.testing.assert_allclose(fam.b_prime(y) * fam.a(y), 1.0, rtol=1e-12, atol=0)
    assert np.all(fam.a(y) > 0)


def test_family_kernels():
    y = np.array([0.5, 2.0, 7.0])
    np.testing.assert_array_equal(NORMAL_IID.a(y), 1.0)
    np.testing.assert_array_equal(NORMAL_IID.b(y), y)
    np.testing.assert_array_equal(GAMMA.a(y), y)
    np.testing.assert_allclose(GAMMA.b(y), np.log(y))
    np.testing.assert_array_equal(EXPONENTIAL.a(-y), 1.0)
    np.testing.assert_array_equal(EXPONENTIAL.b(-y), -y)
    assert EXPONENTIAL.natural_parameter(4.0) == 0.25


@pytest.mark.parametrize("fam, theta, x, expected", [
    (NORMAL_IID, 0.0, 0.0, 1 / math.sqrt(2 * math.pi)),
    (GAMMA, 1.0, 1.0, math.exp(-1)),
    (GAMMA, 2.0, 1.0, math.exp(-1)),
    (EXPONENTIAL, 2.0, 1.0, 0.5 * math.exp(-0.5)),
])
def test_density_examples(fam, theta, x, expected):
    assert density(fam, theta, x) == pytest.approx(expected, rel=1e-14)


def test_density_large_shape_stays_finite():
    # mode of Gamma(250005, 1); direct evaluation of x^(t-1)/Gamma(t) overflows
    value = log_density(GAMMA, 250005.0, 250004.0)
    assert math.isfinite(value)
    assert value == pytest.approx(-0.5 * math.log(2 * math.pi * 250004.0), abs=1e-5)


@pytest.mark.parametrize("fam, thetas, lo, hi", [
    (NORMAL_IID, [-3.0, 0.0, 2.5], -math.inf, math.inf),
    (GAMMA, [0.3, 1.0, 4.0, 50.0], 0.0, math.inf),
    (EXPONENTIAL, [0.2, 1.0, 7.0], 0.0, math.inf),
])
def test_density_integrates_to_one(fam, thetas, lo, hi):
    for theta in thetas:
        f = lambda x: density(fam, theta, x)
        if fam is NORMAL_IID:
            total = integrate.quad(f, lo, theta, limit=200)[0] + integrate.quad(f, theta, hi, limit=200)[0]
        else:
            mode = max(theta - 1.0, 1e-3) if fam is GAMMA else theta
            total = (integrate.quad(f, lo, mode, limit=200)[0]
                     + integrate.quad(f, mode, hi, limit=200)[0])
        assert abs(total - 1.0) <= 1e-6, (theta, total)


def test_density_domain_errors():
    with pytest.raises(DomainError):
        density(GAMMA, 1.0, 0.0)
    with pytest.raises(DomainError):
        density(EXPONENTIAL, 1.0, -1.0)
    with pytest.raises(DomainError):
        density(GAMMA, -1.0, 1.0)


@pytest.mark.parametrize("fam, x, expected", [
    (NORMAL_IID, [3.0, 4.0], 25.0),
    (GAMMA, [1.0, math.e], 1.0),
    (GAMMA, [1.0, 1.0], 0.0),
    (EXPONENTIAL, [3.0, 4.0], 25.0),
])
def test_s_statistic_examples(fam, x, expected):
    assert s_statistic(fam, x) == pytest.approx(expected, rel=1e-15)


def test_s_statistic_log_space_and_support():
    assert s_statistic(GAMMA, None, log_x=[-800.0, 2.0]) == 640004.0
    with pytest.raises(DomainError):
        s_statistic(GAMMA, [1.0, -2.0])
    with pytest.raises(DomainError):
        s_statistic(NORMAL_IID, [1.0], log_x=[0.0])


def test_s_statistic_zero_only_when_all_stats_zero():
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.normal(size=5)
        x[rng.random(5) < 0.3] = 0.0
        s = s_statistic(NORMAL_IID, x)
        assert s >= 0
        assert (s == 0) == bool(np.all(x == 0))


def test_validate_parameter_space_examples():
    assert validate_parameter_space(ParameterSpace(5, 0, 2), [1, 1]) == []
    problems = validate_parameter_space(ParameterSpace(1, 0, 2), [1, 1])
    assert len(problems) == 1 and "norm" in problems[0]
    problems = validate_parameter_space(ParameterSpace(5, 0.5, 2), [0.2, 1])
    assert len(problems) == 1 and "theta_1" in problems[0] and "comp_lo" in problems[0]


def test_validate_reports_every_violation():
    problems = validate_parameter_space(ParameterSpace(1, 0.5, 2), [0.2, 3.0])
    assert len(problems) == 3


def test_space_from_theta_validates_its_own_theta():
    theta = np.arange(1, 501) * 0.37 + 5
    assert validate_parameter_space(ParameterSpace.from_theta(theta), theta) == []


def test_parameter_space_checks():
    with pytest.raises(ConfigurationError):
        ParameterSpace(-1, 0, 1)
    with pytest.raises(ConfigurationError):
        ParameterSpace(1, 2, 1)
    with pytest.raises(ConfigurationError):
        ParameterSpace(1, 0, 1, lambda_star=0)
    space = ParameterSpace.from_theta([0.0, 0.0], cov=[[2.0, 0.0], [0.0, 1.0]])
    assert space.tau == 0 and space.lambda_star == pytest.approx(2.0)


def test_family_lookup():
    assert family("gamma") is GAMMA
    with pytest.raises(ConfigurationError):
        family("poisson")
