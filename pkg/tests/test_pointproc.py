import numpy as np
import pytest
from scipy.stats import binomtest

from gidlab.distributions import DistributionSpec, empirical_transform, make_rng
from gidlab.pointproc import (
    MarkedPath,
    MultiplicityError,
    check_renewal_independence,
    check_same_type,
    check_thm31,
    superpose,
    thin,
    thinned_interarrival_samples,
)
from gidlab.renewal import simulate_renewal_events


class TestMarkedPath:
    def test_validation(self):
        with pytest.raises(ValueError):
            MarkedPath(np.array([1.0, 2.0]), np.array([1, 3]))
        with pytest.raises(ValueError):
            MarkedPath(np.array([2.0, 1.0]), np.array([1, 2]))
        with pytest.raises(ValueError):
            MarkedPath(np.array([1.0]), np.array([1, 2]))


class TestThin:
    def test_partition(self):
        path = simulate_renewal_events(make_rng(0), DistributionSpec.exponential(), 1000)
        marked = thin(path, 0.3, make_rng(1))
        both = np.sort(np.concatenate([marked.projection(1), marked.projection(2)]))
        np.testing.assert_array_equal(both, path.event_times)

    def test_round_trip(self):
        path = simulate_renewal_events(make_rng(2), DistributionSpec.mittag_leffler(0.7), 500)
        marked = thin(path, 0.5, make_rng(3))
        again = superpose(marked.projection(1), marked.projection(2))
        np.testing.assert_array_equal(again.event_times, marked.event_times)
        np.testing.assert_array_equal(again.marks, marked.marks)

    def test_count_is_binomial(self):
        n, p = 10_000, 0.3
        marked = thin(np.arange(1.0, n + 1), p, make_rng(4))
        k = marked.projection(1).size
        assert binomtest(k, n, p).pvalue > 0.001

    def test_p_one_keeps_everything(self):
        marked = thin(np.arange(1.0, 11.0), 1.0, make_rng(5))
        assert np.all(marked.marks == 1)

    @pytest.mark.parametrize("p", [0.0, 1.2, -0.5])
    def test_bad_p(self, p):
        with pytest.raises(ValueError):
            thin(np.arange(1.0, 5.0), p, make_rng(0))

    def test_thinned_ml_transform(self):
        # thinned ML(alpha) gaps have LT 1/(1 + s**alpha/p)
        a, p = 0.7, 0.3
        path = simulate_renewal_events(make_rng(6), DistributionSpec.mittag_leffler(a), 20_000)
        gaps = thinned_interarrival_samples(thin(path, p, make_rng(7)), 1)
        s = np.array([0.1, 0.5, 1.0, 2.0])
        mean, se = empirical_transform(gaps, s)
        assert np.all(np.abs(mean - 1 / (1 + s**a / p)) < 3 * se + 0.01)

    def test_too_few_events(self):
        with pytest.raises(ValueError):
            thinned_interarrival_samples(MarkedPath(np.array([1.0, 2.0]), np.array([1, 2])), 1)


class TestSuperpose:
    def test_marks(self):
        m = superpose(np.array([1.0, 3.0]), np.array([2.0]))
        np.testing.assert_array_equal(m.event_times, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(m.marks, [1, 2, 1])

    def test_tie(self):
        with pytest.raises(MultiplicityError):
            superpose(np.array([1.0, 2.0]), np.array([2.0]))

    def test_empty(self):
        m = superpose(np.array([]), np.array([0.5]))
        assert len(m) == 1 and m.marks[0] == 2

    def test_alternating_marks_double_mean(self):
        # alternate labels: every other gap is a sum of two i.i.d. gaps
        path = simulate_renewal_events(make_rng(8), DistributionSpec.exponential(), 20_000)
        t = path.event_times
        marks = np.where(np.arange(t.size) % 2 == 0, 1, 2)
        gaps = thinned_interarrival_samples(MarkedPath(t, marks), 1)
        se = gaps.std(ddof=1) / np.sqrt(gaps.size)
        assert abs(gaps.mean() - 2.0) < 4 * se


class TestThm31:
    @pytest.mark.parametrize("alpha,p", [(0.7, 0.3), (0.7, 0.5), (1.0, 0.3), (1.0, 0.5)])
    def test_passes(self, alpha, p):
        rep = check_thm31(make_rng(0), alpha, p)
        assert rep.passed
        assert rep.n1 + rep.n2 == 9_998

    def test_wrong_index_detected(self):
        rep = check_thm31(make_rng(0), 0.7, 0.3, test_alpha=0.5)
        assert not rep.passed

    def test_report_keys(self):
        d = check_thm31(make_rng(1), 1.0, 0.5, n_events=2000).as_dict()
        assert {"ks_n1", "ks_n2", "critical", "pass"} <= d.keys()

    def test_bad_p(self):
        with pytest.raises(ValueError):
            check_thm31(make_rng(0), 0.7, 1.0)


class TestSameType:
    def test_pure_scale(self):
        x = DistributionSpec.mittag_leffler(0.7).sample(make_rng(10), 5000)
        rep = check_same_type(x, 3.0 * x)
        assert rep.scale_estimate == pytest.approx(3.0, rel=1e-12)
        assert rep.passed

    def test_exponential_vs_ml(self):
        rng = make_rng(11)
        x = DistributionSpec.exponential().sample(rng, 5000)
        y = DistributionSpec.mittag_leffler(0.5).sample(rng, 5000)
        assert not check_same_type(x, y).passed

    def test_ml_vs_thinned_ml(self):
        rng = make_rng(12)
        spec = DistributionSpec.mittag_leffler(0.7)
        path = simulate_renewal_events(rng, spec, 30_000)
        gaps = thinned_interarrival_samples(thin(path, 0.3, rng), 1)
        rep = check_same_type(spec.sample(rng, gaps.size), gaps)
        assert rep.passed
        # scale should be near p**(-1/alpha)
        assert rep.scale_estimate == pytest.approx(0.3 ** (-1 / 0.7), rel=0.1)

    def test_empty(self):
        with pytest.raises(ValueError):
            check_same_type([], [1.0])


class TestIndependence:
    def test_iid(self):
        x = make_rng(20).exponential(size=2000)
        rep = check_renewal_independence(x, make_rng(21))
        assert rep.passed and rep.n == 2000

    def test_ar1_detected(self):
        rng = make_rng(22)
        e = rng.standard_normal(2000)
        y = np.empty_like(e)
        y[0] = e[0]
        for i in range(1, y.size):
            y[i] = 0.5 * y[i - 1] + e[i]
        rep = check_renewal_independence(np.exp(y), make_rng(23))
        assert not rep.passed
        assert rep.p_value == pytest.approx(1 / 1001)

    def test_deterministic(self):
        x = make_rng(24).exponential(size=500)
        a = check_renewal_independence(x, make_rng(1)).p_value
        b = check_renewal_independence(x, make_rng(1)).p_value
        assert a == b

    def test_too_short(self):
        with pytest.raises(ValueError):
            check_renewal_independence(np.ones(50))
