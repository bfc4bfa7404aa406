import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import erfcx

from gidlab.distributions import (
    DistributionSpec,
    RngState,
    closed_form_transform,
    empirical_transform,
    invert_lt,
    ks_critical,
    ks_statistic,
    ks_two_sample,
    make_rng,
    ml_cdf,
    ml_cdf_inversion,
    ml_cdf_series,
    sample_geometric_sum,
    sample_linnik,
    sample_mittag_leffler,
    sample_positive_stable,
)
from gidlab.transform_core import geometric_compound

N = 100_000


def ml_half_cdf(x):
    # E_{1/2}(-z) = exp(z^2) erfc(z), z = sqrt(x)
    return 1.0 - erfcx(np.sqrt(x))


class TestRng:
    def test_same_stream_identical(self):
        a = make_rng(7, 3).random(10)
        b = RngState(7, 3).generator().random(10)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        assert not np.array_equal(make_rng(7, 0).random(10), make_rng(7, 1).random(10))

    def test_streams_uncorrelated(self):
        a, b = make_rng(7, 0).random(50_000), make_rng(7, 1).random(50_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.02


class TestPositiveStable:
    def test_half_lt_at_one(self):
        s = sample_positive_stable(make_rng(1), 0.5, N)
        assert np.mean(np.exp(-s)) == pytest.approx(math.exp(-1), abs=0.005)

    def test_half_matches_levy(self):
        rng = make_rng(2)
        s = sample_positive_stable(rng, 0.5, N)
        z = rng.standard_normal(N)
        assert ks_two_sample(s, 1 / (2 * z * z)) < ks_critical(N, N)

    @pytest.mark.parametrize("alpha", [0.3, 0.7, 0.9])
    def test_lt(self, alpha):
        s = sample_positive_stable(make_rng(3), alpha, N)
        args = np.array([0.5, 1.0, 2.0])
        emp, se = empirical_transform(s, args)
        np.testing.assert_array_less(np.abs(emp - np.exp(-(args**alpha))), 3 * se + 0.005)

    def test_lt_at_zero(self):
        s = sample_positive_stable(make_rng(4), 0.6, 100)
        assert empirical_transform(s, [0.0])[0][0] == 1.0

    def test_alpha_one_point_mass(self):
        np.testing.assert_array_equal(sample_positive_stable(make_rng(0), 1.0, 5), 1.0)

    @pytest.mark.parametrize("alpha", [0.0, 1.2, -1])
    def test_range(self, alpha):
        with pytest.raises(ValueError):
            sample_positive_stable(make_rng(0), alpha, 5)


class TestMittagLeffler:
    def test_exponential_reduction(self):
        x = sample_mittag_leffler(make_rng(5), 1.0, 1.0, N)
        assert x.mean() == pytest.approx(1.0, abs=0.02)

    def test_lt(self):
        x = sample_mittag_leffler(make_rng(6), 0.7, 1.0, N)
        assert abs(np.mean(np.exp(-x)) - 1 / (1 + 1.0)) < 0.01

    def test_cdf_at_one(self):
        x = sample_mittag_leffler(make_rng(7), 0.5, 1.0, N)
        assert np.mean(x <= 1.0) == pytest.approx(0.5724, abs=0.005)

    def test_scale(self):
        x = sample_mittag_leffler(make_rng(8), 0.6, 2.5, N)
        args = np.array([0.5, 1.0])
        emp, se = empirical_transform(x, args)
        np.testing.assert_array_less(np.abs(emp - 1 / (1 + (2.5 * args) ** 0.6)), 3 * se + 0.005)

    def test_range(self):
        with pytest.raises(ValueError):
            sample_mittag_leffler(make_rng(0), 1.5, 1.0, 5)


class TestLinnik:
    def test_laplace_variance(self):
        x = sample_linnik(make_rng(9), 2.0, 1.0, N)
        assert x.var() == pytest.approx(2.0, abs=0.05)

    def test_symmetric(self):
        x = sample_linnik(make_rng(10), 1.5, 1.0, N)
        assert abs(x.mean()) < 0.05
        assert abs(np.mean(x > 0) - 0.5) < 0.01

    def test_cf(self):
        x = sample_linnik(make_rng(11), 1.0, 1.0, N)
        assert abs(np.mean(np.cos(x)) - 0.5) < 0.01


class TestGeometricSum:
    def test_exponential(self):
        x = sample_geometric_sum(make_rng(12), DistributionSpec.exponential(), 0.5, N)
        assert x.mean() == pytest.approx(2.0, abs=0.04)

    def test_p_one(self):
        spec = DistributionSpec.exponential()
        np.testing.assert_array_equal(
            sample_geometric_sum(make_rng(13), spec, 1.0, 50), spec.sample(make_rng(13), 50)
        )

    def test_ml_stability(self):
        a, p, n = 0.7, 0.5, 10_000
        spec = DistributionSpec.mittag_leffler(a)
        sums = p ** (1 / a) * sample_geometric_sum(make_rng(14), spec, p, n)
        direct = spec.sample(make_rng(15), n)
        assert ks_two_sample(sums, direct) < ks_critical(n, n)

    def test_transform(self):
        spec = DistributionSpec("gamma_exponent", 0.5)
        x = sample_geometric_sum(make_rng(16), spec, 0.3, N)
        args = np.array([0.5, 1.0, 2.0])
        emp, se = empirical_transform(x, args)
        exact = geometric_compound(closed_form_transform(spec), 0.3)(args)
        np.testing.assert_array_less(np.abs(emp - exact), 3 * se + 0.005)

    def test_range(self):
        with pytest.raises(ValueError):
            sample_geometric_sum(make_rng(0), DistributionSpec.exponential(), 0.0, 5)


class TestSpecs:
    def test_closed_forms(self):
        assert closed_form_transform(DistributionSpec("gamma_exponent", 1.0))(1.0) == 0.5
        assert closed_form_transform(DistributionSpec("two_param_ml", 0.5, beta=0.5))(1.0) == pytest.approx(
            2**-0.5, abs=1e-15
        )
        assert closed_form_transform(DistributionSpec("linnik", 1.3))(0.0) == 1.0

    def test_reductions(self):
        s = np.geomspace(1e-3, 10, 50)
        ml1 = closed_form_transform(DistributionSpec.mittag_leffler(1.0))(s)
        np.testing.assert_allclose(ml1, closed_form_transform(DistributionSpec.exponential())(s), rtol=1e-15)
        tp = closed_form_transform(DistributionSpec("two_param_ml", 0.6, beta=1.0))(s)
        np.testing.assert_allclose(tp, closed_form_transform(DistributionSpec.mittag_leffler(0.6))(s), rtol=1e-14)
        g = closed_form_transform(DistributionSpec("two_param_ml", 1.0, beta=0.4))(s)
        np.testing.assert_allclose(g, closed_form_transform(DistributionSpec("gamma_exponent", 0.4))(s), rtol=1e-14)

    def test_reduction_samples(self):
        n = 20_000
        a = DistributionSpec("two_param_ml", 0.6, beta=1.0).sample(make_rng(20), n)
        b = DistributionSpec.mittag_leffler(0.6).sample(make_rng(21), n)
        assert ks_two_sample(a, b) < ks_critical(n, n)

    def test_semi_ml_candidate_has_no_sampler(self):
        spec = DistributionSpec("semi_ml_candidate", 0.5, eps=0.01, b=0.5)
        assert closed_form_transform(spec)(0.0) == 1.0
        with pytest.raises(ValueError):
            spec.sample(make_rng(0), 3)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(family="mittag_leffler", alpha=1.2), dict(family="linnik", alpha=2.5),
         dict(family="gamma_exponent", alpha=-1.0), dict(family="exponential", scale=0.0),
         dict(family="banana")],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            DistributionSpec(**kwargs)

    def test_deterministic(self):
        spec = DistributionSpec("two_param_ml", 0.7, beta=0.5)
        np.testing.assert_array_equal(spec.sample(make_rng(3, 2), 100), spec.sample(make_rng(3, 2), 100))


class TestMlCdf:
    def test_exponential(self):
        assert ml_cdf(1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)

    def test_half_at_one(self):
        assert ml_cdf(0.5, 1.0) == pytest.approx(0.5724, abs=1e-4)
        assert ml_cdf(0.5, 1.0) == pytest.approx(ml_half_cdf(1.0), abs=1e-13)

    def test_zero(self):
        assert ml_cdf(0.6, 0.0) == 0.0

    def test_half_against_erfc_oracle(self):
        x = np.concatenate([np.linspace(0, 100, 301), np.geomspace(100, 1e6, 30)])
        np.testing.assert_allclose(ml_cdf(0.5, x), ml_half_cdf(x), atol=1e-10)

    @pytest.mark.parametrize("alpha", [0.5, 0.7, 0.9])
    def test_branch_agreement(self, alpha):
        x = np.linspace(5, 10, 25) ** (1 / alpha)
        assert np.max(np.abs(ml_cdf_series(alpha, x) - ml_cdf_inversion(alpha, x))) < 1e-6

    def test_against_mpmath_inversion(self):
        mpmath = pytest.importorskip("mpmath")
        for x in (0.3, 2.0, 40.0):
            ref = float(mpmath.invertlaplace(lambda s: 1 / (s * (1 + s**0.7)), x, method="talbot"))
            assert ml_cdf(0.7, x) == pytest.approx(ref, abs=1e-10)

    def test_monotone(self):
        x = np.geomspace(1e-4, 1e5, 400)
        assert np.all(np.diff(ml_cdf(0.4, x)) >= -1e-12)

    def test_scale(self):
        assert ml_cdf(0.7, 2.0, scale=2.0) == pytest.approx(ml_cdf(0.7, 1.0), abs=1e-15)

    def test_negative(self):
        with pytest.raises(ValueError):
            ml_cdf(0.5, -1.0)


class TestInvertLt:
    def test_exponential_cdf(self):
        assert invert_lt(lambda s: 1 / (s * (1 + s)), [1.0])[0] == pytest.approx(1 - math.exp(-1), abs=1e-8)

    def test_constant(self):
        np.testing.assert_allclose(invert_lt(lambda s: 1 / s, [0.1, 1.0, 30.0]), 1.0, atol=1e-9)

    def test_ml_cross_check(self):
        v = invert_lt(lambda s: 1 / (s * (1 + np.sqrt(s))), [1.0])[0]
        assert v == pytest.approx(0.5724, abs=1e-4)
        assert v == pytest.approx(ml_cdf_series(0.5, np.array([1.0]))[0], abs=1e-8)

    def test_non_finite(self):
        with pytest.raises(FloatingPointError):
            invert_lt(lambda s: np.full_like(s, np.nan), [1.0])

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            invert_lt(lambda s: 1 / s, [0.0])


class TestEmpirical:
    def test_zeros(self):
        v, se = empirical_transform(np.zeros(10), [0.5, 3.0])
        np.testing.assert_array_equal(v, 1.0)
        np.testing.assert_array_equal(se, 0.0)

    def test_exponential(self):
        v, se = empirical_transform(make_rng(30).standard_exponential(N), [1.0])
        assert abs(v[0] - 0.5) < 3 * se[0]

    def test_ml(self):
        x = sample_mittag_leffler(make_rng(31), 0.7, 1.0, N)
        v, se = empirical_transform(x, [2.0])
        assert abs(v[0] - 1 / (1 + 2**0.7)) < 3 * se[0]

    def test_cf_real(self):
        v, _ = empirical_transform(np.array([0.0, np.pi]), [1.0], kind="cf_real")
        assert v[0] == pytest.approx(0.0, abs=1e-15)

    def test_empty(self):
        with pytest.raises(ValueError):
            empirical_transform([], [1.0])


class TestKS:
    def test_same_law(self):
        n = 10_000
        x = make_rng(40).standard_exponential(n)
        assert ks_statistic(x, stats.expon.cdf) < 1.63 / math.sqrt(n)

    def test_single_sample(self):
        assert ks_statistic([0.0], stats.norm.cdf) == 0.5

    def test_wrong_rate(self):
        x = make_rng(41).standard_exponential(10_000)
        assert ks_statistic(x, lambda t: 1 - np.exp(-2 * t)) > 0.15

    def test_matches_scipy(self):
        x = make_rng(42).standard_normal(500)
        assert ks_statistic(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-14)
        y = make_rng(43).standard_normal(300) + 0.1
        assert ks_two_sample(x, y) == pytest.approx(stats.ks_2samp(x, y).statistic, abs=1e-14)

    def test_critical(self):
        assert ks_critical(10_000) == pytest.approx(0.01628)
        assert ks_critical(100, 100) == pytest.approx(1.628 * math.sqrt(0.02))
