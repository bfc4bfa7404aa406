"""Bernoulli thinning, superposition and the renewal checks built on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .distributions import (
    DistributionSpec,
    ks_critical,
    ks_statistic,
    ks_two_sample,
    make_rng,
    ml_cdf,
)
from .renewal import RenewalPath, simulate_renewal_events


class MultiplicityError(ValueError):
    """Two superposed processes share an event time."""


@dataclass(frozen=True)
class MarkedPath:
    """Event times with origin labels 1 or 2 (the indicator process)."""

    event_times: np.ndarray
    marks: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.event_times, dtype=float)
        m = np.asarray(self.marks, dtype=np.int8)
        if t.shape != m.shape or t.ndim != 1:
            raise ValueError("times and marks must be 1-d and of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("event times must be strictly increasing")
        if not np.all((m == 1) | (m == 2)):
            raise ValueError("marks must be 1 or 2")
        object.__setattr__(self, "event_times", t)
        object.__setattr__(self, "marks", m)

    def __len__(self):
        return self.event_times.size

    def projection(self, which: int) -> np.ndarray:
        return self.event_times[self.marks == which]


def thin(path, p: float, rng: np.random.Generator) -> MarkedPath:
    """Mark each event 1 with probability ``p``, else 2, independently."""
    if not 0.0 < p <= 1.0:
        raise ValueError("thinning probability must lie in (0, 1]")
    times = path.event_times if isinstance(path, (RenewalPath, MarkedPath)) else np.asarray(path, float)
    keep = rng.random(times.size) < p
    return MarkedPath(times, np.where(keep, 1, 2))


def superpose(path1, path2) -> MarkedPath:
    """Merge two event sets, labelling origins 1 and 2.  Ties are rejected."""
    t1 = np.asarray(getattr(path1, "event_times", path1), dtype=float)
    t2 = np.asarray(getattr(path2, "event_times", path2), dtype=float)
    times = np.concatenate([t1, t2])
    marks = np.concatenate([np.ones(t1.size, np.int8), np.full(t2.size, 2, np.int8)])
    order = np.argsort(times, kind="stable")
    times, marks = times[order], marks[order]
    if np.any(np.diff(times) == 0):
        raise MultiplicityError("superposed processes share an event time")
    return MarkedPath(times, marks)


def thinned_interarrival_samples(marked: MarkedPath, which: int = 1) -> np.ndarray:
    t = marked.projection(which)
    if t.size < 2:
        raise ValueError(f"fewer than 2 events with mark {which}")
    return np.diff(t)


@dataclass(frozen=True)
class Thm31Report:
    ks_n1: float
    ks_n2: float
    critical_n1: float
    critical_n2: float
    n1: int
    n2: int

    @property
    def passed(self) -> bool:
        return self.ks_n1 < self.critical_n1 and self.ks_n2 < self.critical_n2

    def as_dict(self) -> dict:
        return {
            "ks_n1": self.ks_n1,
            "ks_n2": self.ks_n2,
            # one-sample 1% critical value for the smaller of the two samples
            "critical": max(self.critical_n1, self.critical_n2),
            "critical_n1": self.critical_n1,
            "critical_n2": self.critical_n2,
            "n1": self.n1,
            "n2": self.n2,
            "pass": self.passed,
        }


def check_thm31(
    rng: np.random.Generator,
    alpha: float,
    p: float,
    n_events: int = 10_000,
    test_alpha: float | None = None,
) -> Thm31Report:
    """Thin a Mittag-Leffler renewal path and test both parts against ML(alpha).

    Mark-1 gaps are rescaled by ``p**(1/alpha)``, mark-2 gaps by
    ``q**(1/alpha)``; each is KS-tested against the ML CDF with index
    ``test_alpha`` (defaults to ``alpha``; other values give a negative control).
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    test_alpha = alpha if test_alpha is None else test_alpha
    path = simulate_renewal_events(rng, DistributionSpec.mittag_leffler(alpha), n_events)
    marked = thin(path, p, rng)
    g1 = thinned_interarrival_samples(marked, 1) * p ** (1.0 / alpha)
    g2 = thinned_interarrival_samples(marked, 2) * (1.0 - p) ** (1.0 / alpha)

    def cdf(x):
        return ml_cdf(test_alpha, x)

    return Thm31Report(
        ks_statistic(g1, cdf), ks_statistic(g2, cdf),
        ks_critical(g1.size), ks_critical(g2.size), g1.size, g2.size,
    )


@dataclass(frozen=True)
class SameTypeReport:
    scale_estimate: float
    ks_after_rescale: float
    critical: float

    @property
    def passed(self) -> bool:
        return self.ks_after_rescale < self.critical

    def as_dict(self) -> dict:
        return {
            "scale_estimate": self.scale_estimate,
            "ks_after_rescale": self.ks_after_rescale,
            "critical": self.critical,
            "pass": self.passed,
        }


def check_same_type(samples1, samples2) -> SameTypeReport:
    """Equality up to a positive scale: median-ratio scale, then two-sample KS."""
    a = np.asarray(samples1, dtype=float)
    b = np.asarray(samples2, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("same-type check needs nonempty samples")
    ma, mb = np.median(a), np.median(b)
    if ma == 0 or mb == 0:
        raise ValueError("zero median: scale is not identifiable")
    c = float(mb / ma)
    return SameTypeReport(c, ks_two_sample(a, b / c), ks_critical(a.size, b.size))


@dataclass(frozen=True)
class IndependenceReport:
    lag1_stat: float
    p_value: float
    n: int

    @property
    def passed(self) -> bool:
        return self.p_value > 0.01

    def as_dict(self) -> dict:
        return {"lag1_stat": self.lag1_stat, "p_value": self.p_value, "n": self.n, "pass": self.passed}


def _lag1_rank_corr(r: np.ndarray) -> np.ndarray:
    # r: (..., n) ranks; Pearson correlation of consecutive pairs
    a, b = r[..., :-1], r[..., 1:]
    a = a - a.mean(axis=-1, keepdims=True)
    b = b - b.mean(axis=-1, keepdims=True)
    den = np.sqrt((a * a).sum(-1) * (b * b).sum(-1))
    return np.where(den > 0, (a * b).sum(-1) / np.where(den > 0, den, 1.0), 0.0)


def check_renewal_independence(samples, rng: np.random.Generator | None = None, n_perm: int = 1000) -> IndependenceReport:
    """Lag-1 Spearman correlation with a two-sided permutation p-value."""
    x = np.asarray(samples, dtype=float)
    if x.size < 100:
        raise ValueError("independence check needs at least 100 inter-arrivals")
    rng = make_rng(0) if rng is None else rng
    r = rankdata(x)
    obs = float(_lag1_rank_corr(r))
    hits = 0
    for start in range(0, n_perm, 100):
        perms = np.stack([rng.permutation(r) for _ in range(min(100, n_perm - start))])
        hits += np.count_nonzero(np.abs(_lag1_rank_corr(perms)) >= abs(obs))
    p_value = (1 + hits) / (n_perm + 1)
    return IndependenceReport(obs, float(p_value), x.size)
