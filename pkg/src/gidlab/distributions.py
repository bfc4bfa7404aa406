"""Samplers, closed-form transforms and CDFs for the GID families.

All samplers take a :class:`numpy.random.Generator`; build one from a
``(seed, stream)`` pair with :func:`make_rng` to get reproducible, independent
substreams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln

from .transform_core import (
    PsiFunction,
    TransformFn,
    lt_from_psi,
    psi_gamma_exponent,
    psi_log_periodic,
    psi_power,
    psi_two_param,
)

FAMILIES = (
    "exponential",
    "gamma_exponent",
    "positive_stable",
    "mittag_leffler",
    "linnik",
    "two_param_ml",
    "semi_ml_candidate",
)

# 1% two-sided Kolmogorov-Smirnov constant (asymptotic)
KS_C_01 = 1.628


# ---------------------------------------------------------------------------
# RNG plumbing


@dataclass(frozen=True)
class RngState:
    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return make_rng(self.seed, self.stream)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for substream ``stream`` of ``seed``.

    Streams are derived through ``SeedSequence`` spawn keys, so distinct
    stream ids give statistically independent sequences.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# family specs


@dataclass(frozen=True)
class DistributionSpec:
    """A tagged family with its parameters.

    ``alpha`` is the index (or the gamma shape for ``gamma_exponent``),
    ``beta`` the second exponent of ``two_param_ml``, ``scale`` a scale
    factor.  ``eps`` and ``b`` only matter for ``semi_ml_candidate``.
    """

    family: str
    alpha: float = 1.0
    scale: float = 1.0
    beta: float = 1.0
    eps: float = 0.0
    b: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        a = self.alpha
        if self.family == "gamma_exponent":
            if a <= 0:
                raise ValueError("gamma shape must be positive")
        elif self.family == "linnik":
            if not 0 < a <= 2:
                raise ValueError("Linnik index must lie in (0, 2]")
        elif self.family == "positive_stable":
            if not 0 < a <= 1:
                raise ValueError("positive stable index must lie in (0, 1]")
        elif self.family in ("mittag_leffler", "two_param_ml", "semi_ml_candidate"):
            if not 0 < a <= 1:
                raise ValueError(f"{self.family} index must lie in (0, 1]")
        if self.family == "two_param_ml" and self.beta <= 0:
            raise ValueError("beta must be positive")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "DistributionSpec":
        return cls("exponential", 1.0, 1.0 / rate)

    @classmethod
    def mittag_leffler(cls, alpha: float, scale: float = 1.0) -> "DistributionSpec":
        return cls("mittag_leffler", alpha, scale)

    @property
    def is_symmetric(self) -> bool:
        return self.family == "linnik"

    def psi(self) -> PsiFunction:
        """Exponent of the closed-form transform, when the law is GID-shaped."""
        f, a, c = self.family, self.alpha, self.scale
        if f == "exponential":
            return psi_power(1.0, c)
        if f in ("mittag_leffler", "linnik"):
            return psi_power(a, c)
        if f == "gamma_exponent":
            return _scale_psi_argument(psi_gamma_exponent(a), c)
        if f == "two_param_ml":
            return _scale_psi_argument(psi_two_param(a, self.beta), c)
        if f == "semi_ml_candidate":
            return _scale_psi_argument(psi_log_periodic(a, self.eps, self.b), c)
        raise ValueError(f"{f} transform is not of the form 1/(1+psi)")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        f, a, c = self.family, self.alpha, self.scale
        if f == "exponential":
            return c * rng.standard_exponential(n)
        if f == "gamma_exponent":
            return c * rng.standard_gamma(a, n)
        if f == "positive_stable":
            return c * sample_positive_stable(rng, a, n)
        if f == "mittag_leffler":
            return sample_mittag_leffler(rng, a, c, n)
        if f == "linnik":
            return sample_linnik(rng, a, c, n)
        if f == "two_param_ml":
            g = rng.standard_gamma(self.beta, n)
            return c * g ** (1.0 / a) * sample_positive_stable(rng, a, n)
        raise ValueError("semi_ml_candidate has no exact sampler")


def _scale_psi_argument(psi: PsiFunction, c: float) -> PsiFunction:
    if c == 1.0:
        return psi
    d = psi.derivative
    return PsiFunction(
        lambda s: psi.evaluator(c * s),
        "composite",
        (*psi.params, c),
        None if d is None else (lambda s: c * d(c * s)),
    )


def closed_form_transform(spec: DistributionSpec) -> TransformFn:
    """Exact LT (or real CF profile for Linnik) of ``spec``."""
    if spec.family == "positive_stable":
        a, c = spec.alpha, spec.scale
        return TransformFn(lambda s: np.exp(-((c * s) ** a)))
    tag = "cf_profile" if spec.family == "linnik" else "laplace"
    return lt_from_psi(spec.psi(), tag)


# ---------------------------------------------------------------------------
# samplers


def _check_n(n: int) -> int:
    n = int(n)
    if n < 0:
        raise ValueError("sample size must be non-negative")
    return n


def sample_positive_stable(rng: np.random.Generator, alpha: float, n: int) -> np.ndarray:
    """One-sided stable draws with LT ``exp(-s**alpha)`` (Kanter's method).

    ``alpha = 1`` gives the point mass at 1.
    """
    n = _check_n(n)
    if alpha == 1.0:
        return np.ones(n)
    if not 0.0 < alpha < 1.0:
        raise ValueError("positive stable index must lie in (0, 1)")
    u = rng.random(n)
    e = rng.standard_exponential(n)
    # U = 0 would give a 0/0 in a(u); resample-free nudge into (0, 1)
    u = np.where(u > 0.0, u, np.finfo(float).tiny)
    pu = np.pi * u
    a_u = (
        np.sin((1.0 - alpha) * pu)
        * np.sin(alpha * pu) ** (alpha / (1.0 - alpha))
        / np.sin(pu) ** (1.0 / (1.0 - alpha))
    )
    return (a_u / e) ** ((1.0 - alpha) / alpha)


def sample_mittag_leffler(rng: np.random.Generator, alpha: float, scale: float, n: int) -> np.ndarray:
    """Draws with LT ``1 / (1 + (scale*s)**alpha)``."""
    n = _check_n(n)
    if not 0.0 < alpha <= 1.0 or scale <= 0:
        raise ValueError("Mittag-Leffler needs alpha in (0, 1] and scale > 0")
    e = rng.standard_exponential(n)
    return scale * e ** (1.0 / alpha) * sample_positive_stable(rng, alpha, n)


def sample_linnik(rng: np.random.Generator, alpha: float, scale: float, n: int) -> np.ndarray:
    """Symmetric draws with CF ``1 / (1 + (scale*|t|)**alpha)``."""
    n = _check_n(n)
    if not 0.0 < alpha <= 2.0 or scale <= 0:
        raise ValueError("Linnik needs alpha in (0, 2] and scale > 0")
    e = rng.standard_exponential(n)
    if alpha == 2.0:
        mix = np.full(n, 2.0)
    else:
        mix = 2.0 * sample_positive_stable(rng, alpha / 2.0, n)
    z = np.sqrt(mix) * rng.standard_normal(n)
    return scale * e ** (1.0 / alpha) * z


def sample_geometric_sum(rng: np.random.Generator, base: DistributionSpec, p: float, n: int) -> np.ndarray:
    """Sums of ``N`` i.i.d. ``base`` draws, ``P(N = k) = p q**(k-1)``, k >= 1."""
    n = _check_n(n)
    if not 0.0 < p <= 1.0:
        raise ValueError("geometric parameter must lie in (0, 1]")
    counts = np.ones(n, dtype=np.int64) if p == 1.0 else rng.geometric(p, n)
    draws = base.sample(rng, int(counts.sum()))
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return np.add.reduceat(draws, starts) if n else draws[:0]


# ---------------------------------------------------------------------------
# Mittag-Leffler CDF


SERIES_LIMIT = 10.0
# beyond ~60 digits of cancellation the series is too slow; invert instead
_MAX_LOG_TERM = 60 * math.log(10.0)
# float series is used while the largest term stays below this
_FLOAT_SERIES_MAX_TERM = 1e3


@lru_cache(maxsize=64)
def _rgamma_coeffs(alpha: float, kmax: int) -> np.ndarray:
    k = np.arange(kmax + 1)
    return np.exp(-gammaln(1.0 + alpha * k))


def _log_max_term(alpha: float, z: float) -> float:
    # log of the largest |z**k / Gamma(1 + alpha k)|
    if z <= 0:
        return 0.0
    k = np.arange(0, int(3 * z ** (1.0 / alpha)) + 50)
    return float(np.max(k * math.log(z) - gammaln(1.0 + alpha * k)))


def _ml_series_float(alpha: float, z: np.ndarray) -> np.ndarray:
    kmax = 200
    coeffs = _rgamma_coeffs(alpha, kmax)
    out = np.zeros_like(z)
    term_pow = np.ones_like(z)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(kmax + 1):
        term = term_pow * coeffs[k]
        out = np.where(done, out, out + term)
        done |= np.abs(term) < 1e-16 * np.abs(out)
        if done.all():
            break
        term_pow = term_pow * (-z)
    return out


def _ml_series_mp(alpha: float, z: float) -> float:
    """``E_alpha(-z)`` by its power series in enough precision to absorb cancellation."""
    extra = _log_max_term(alpha, z) / math.log(10.0)
    with mpmath.workdps(int(extra) + 25):
        zz = -mpmath.mpf(z)
        a = mpmath.mpf(alpha)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        k = 0
        tiny = mpmath.mpf(10) ** (-20)
        while True:
            term = power * mpmath.rgamma(1 + a * k)
            total += term
            # stop once past the peak and below double precision of the result
            if k > 2 and abs(term) < tiny * max(abs(total), tiny) and k > z ** (1.0 / alpha):
                break
            power *= zz
            k += 1
        return float(total)


def mittag_leffler_e(alpha: float, z) -> np.ndarray:
    """``E_alpha(-z)`` for ``0 <= z <= SERIES_LIMIT`` by the power series."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    log_cut = math.log(_FLOAT_SERIES_MAX_TERM)
    cheap = np.array([_log_max_term(alpha, zi) < log_cut for zi in z], dtype=bool)
    if cheap.any():
        out[cheap] = _ml_series_float(alpha, z[cheap])
    for i in np.flatnonzero(~cheap):
        out[i] = _ml_series_mp(alpha, float(z[i]))
    return out


def ml_cdf_series(alpha: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 1.0 - mittag_leffler_e(alpha, x**alpha).reshape(x.shape)


def ml_cdf_inversion(alpha: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    phi = TransformFn(lambda s: 1.0 / (s * (1.0 + s**alpha)))
    return invert_lt(phi, x.ravel()).reshape(x.shape)


def ml_cdf(alpha: float, x, scale: float = 1.0) -> np.ndarray:
    """CDF ``1 - E_alpha(-(x/scale)**alpha)`` of the Mittag-Leffler law.

    Power series for ``(x/scale)**alpha <= 10``, fixed-Talbot inversion of
    ``1/(s(1+s**alpha))`` beyond.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("Mittag-Leffler index must lie in (0, 1]")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x) / scale
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("Mittag-Leffler CDF needs x >= 0")
    if alpha == 1.0:
        out = -np.expm1(-x)
    else:
        out = np.zeros_like(x)
        z = x**alpha
        series = (x > 0) & (z <= SERIES_LIMIT) & np.isfinite(x)
        series[series] = [_log_max_term(alpha, zi) <= _MAX_LOG_TERM for zi in z[series]]
        far = (x > 0) & ~series & np.isfinite(x)
        if series.any():
            out[series] = ml_cdf_series(alpha, x[series])
        if far.any():
            out[far] = ml_cdf_inversion(alpha, x[far])
        out[np.isinf(x)] = 1.0
        out = np.clip(out, 0.0, 1.0)
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# numerical Laplace inversion


def invert_lt(phi, x, M: int = 32) -> np.ndarray:
    """Fixed-Talbot inversion of the Laplace transform ``phi`` at ``x > 0``.

    ``phi`` must accept complex arrays.  Uses ``M`` contour nodes with
    ``r = 2M/(5x)`` (Abate and Valko); about 1e-10 on smooth inputs in double
    precision.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise ValueError("Talbot inversion needs x > 0")
    fn = phi.evaluator if isinstance(phi, TransformFn) else phi
    r = 2.0 * M / (5.0 * x)
    theta = np.pi * np.arange(1, M) / M
    cot = np.cos(theta) / np.sin(theta)
    nodes = r[:, None] * theta[None, :] * (cot[None, :] + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    with np.errstate(all="ignore"):
        f0 = np.asarray(fn(r.astype(complex)), dtype=complex).real
        fk = np.asarray(fn(nodes), dtype=complex)
    if not (np.all(np.isfinite(f0)) and np.all(np.isfinite(fk))):
        raise FloatingPointError("non-finite transform value on the Talbot contour")
    acc = 0.5 * np.exp(r * x) * f0 + np.sum(
        (np.exp(x[:, None] * nodes) * fk * (1.0 + 1j * sigma[None, :])).real, axis=1
    )
    return r / M * acc


# ---------------------------------------------------------------------------
# empirical transforms and KS


def empirical_transform(samples, arguments, kind: str = "lt"):
    """Monte Carlo transform: mean of ``exp(-s x)`` or ``cos(t x)``.

    Returns ``(values, standard_errors)`` arrays, one entry per argument.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical transform of an empty sample")
    args = np.atleast_1d(np.asarray(arguments, dtype=float))
    if kind == "lt":
        w = np.exp(-np.outer(args, x))
    elif kind == "cf_real":
        w = np.cos(np.outer(args, x))
    else:
        raise ValueError(f"unknown transform kind {kind!r}")
    mean = w.mean(axis=1)
    se = w.std(axis=1, ddof=1) / np.sqrt(x.size) if x.size > 1 else np.zeros_like(mean)
    return mean, se


def ks_statistic(samples, cdf) -> float:
    """One-sample ``sup |F_n - F|``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("KS statistic of an empty sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_two_sample(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic of an empty sample")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical(n: int, m: int | None = None, c: float = KS_C_01) -> float:
    """Asymptotic 1% critical value, one-sample (``m=None``) or two-sample."""
    if m is None:
        return c / math.sqrt(n)
    return c * math.sqrt((n + m) / (n * m))
