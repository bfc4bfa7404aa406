"""Renewal paths, the renewal equation ``Z = z + Z*F`` and fixed-point iteration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import (
    DistributionSpec,
    ks_critical,
    ks_two_sample,
)
from .transform_core import (
    TransformFn,
    compound_then_scale,
    log_grid,
)


# sup-residuals below this are rounding noise, not growth
_ROUNDING_FLOOR = 64 * np.finfo(float).eps


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class RenewalPath:
    event_times: np.ndarray
    horizon: float

    def __post_init__(self):
        t = np.asarray(self.event_times, dtype=float)
        if t.size and (t[0] <= 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("event times must be positive and strictly increasing")
        if t.size and t[-1] > self.horizon:
            raise ValueError("event beyond horizon")
        object.__setattr__(self, "event_times", t)

    @property
    def inter_arrivals(self) -> np.ndarray:
        return np.diff(self.event_times, prepend=0.0)

    def __len__(self):
        return self.event_times.size


@dataclass(frozen=True)
class GridFunction:
    h: float
    horizon: float
    values: np.ndarray

    def __post_init__(self):
        n = int(np.floor(self.horizon / self.h + 1e-9)) + 1
        v = np.asarray(self.values, dtype=float)
        if v.shape != (n,):
            raise ValueError(f"grid function needs {n} values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(self.values.size)

    @classmethod
    def from_function(cls, fn: Callable, h: float, horizon: float) -> "GridFunction":
        n = int(np.floor(horizon / h + 1e-9)) + 1
        return cls(h, horizon, np.asarray(fn(h * np.arange(n)), dtype=float))


def _positive_draws(spec: DistributionSpec, rng, n: int) -> np.ndarray:
    draws = spec.sample(rng, n)
    if np.any(draws <= 0):
        raise ValueError(f"{spec.family} produced a non-positive inter-arrival time")
    return draws


def simulate_renewal(rng: np.random.Generator, spec: DistributionSpec, horizon: float) -> RenewalPath:
    """Renewal path on ``(0, horizon]`` with i.i.d. ``spec`` inter-arrivals."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    chunks, total, last = [], 0, 0.0
    batch = 256
    while True:
        times = last + np.cumsum(_positive_draws(spec, rng, batch))
        keep = times[times <= horizon]
        chunks.append(keep)
        total += keep.size
        if keep.size < batch:
            break
        last = float(times[-1])
        batch = min(batch * 2, 1 << 20)
    return RenewalPath(np.concatenate(chunks), float(horizon))


def simulate_renewal_events(rng: np.random.Generator, spec: DistributionSpec, n_events: int) -> RenewalPath:
    """Renewal path with exactly ``n_events`` events; horizon = last event."""
    if n_events < 1:
        raise ValueError("need at least one event")
    times = np.cumsum(_positive_draws(spec, rng, n_events))
    return RenewalPath(times, float(times[-1]))


def solve_renewal_volterra(z: GridFunction, F_cdf: Callable) -> GridFunction:
    """Explicit solver for ``Z(x) = z(x) + int_0^x Z(x-u) dF(u)``.

    Uses left Riemann-Stieltjes sums on the grid of ``z``:
    ``Z_i = z_i + sum_{j=1..i} Z_{i-j} (F(u_j) - F(u_{j-1}))``.  First order
    in the step.
    """
    x = z.x
    F = np.asarray(F_cdf(x), dtype=float)
    dF = np.diff(F)
    if np.any(dF < -1e-14):
        raise ValueError("F must be nondecreasing on the grid")
    Z = np.empty_like(z.values)
    for i in range(x.size):
        # dF[:i][::-1] pairs u_j with Z_{i-j}
        Z[i] = z.values[i] + (np.dot(Z[:i], dF[:i][::-1]) if i else 0.0)
    return GridFunction(z.h, z.horizon, Z)


@dataclass(frozen=True)
class FixedPointTrace:
    transform: TransformFn
    residuals: np.ndarray
    grid: np.ndarray

    @property
    def final_residual(self) -> float:
        return float(self.residuals[-1]) if self.residuals.size else float("nan")


def eq1_fixed_point_iterate(
    phi0: TransformFn,
    p: float,
    b: float,
    grid=None,
    iters: int = 60,
    tol: float = 0.0,
    growth_tol: float = 1e-3,
) -> FixedPointTrace:
    """Iterate ``phi -> p*phi(b.)/(1 - q*phi(b.))`` from ``phi0``.

    Iterates are kept as function compositions, so values at ``b*s`` are exact
    and need no interpolation.  Records ``sup |phi_{n+1} - phi_n|`` on the
    grid; stops early when it drops to ``tol``.  Three consecutive relative
    increases above ``growth_tol`` raise :class:`DivergenceError`.
    """
    if not 0 < p < 1 or not 0 < b < 1:
        raise ValueError("iteration needs p, b in (0, 1)")
    s = log_grid(1e-3, 10.0, 256) if grid is None else np.asarray(grid, dtype=float)
    phi, cur = phi0, phi0(s)
    residuals, strikes = [], 0
    for _ in range(iters):
        nxt_fn = compound_then_scale(phi, p, b)
        # freeze the grid values so evaluation cost stays linear in depth
        nxt = nxt_fn(s)
        r = float(np.max(np.abs(nxt - cur)))
        if residuals and r > residuals[-1] * (1.0 + growth_tol) and r > _ROUNDING_FLOOR:
            strikes += 1
            if strikes >= 3:
                raise DivergenceError(f"residual grew for 3 consecutive iterations: {residuals[-3:]} -> {r}")
        else:
            strikes = 0
        residuals.append(r)
        phi, cur = nxt_fn, nxt
        if r <= tol:
            break
    return FixedPointTrace(phi, np.asarray(residuals), s)


@dataclass(frozen=True)
class KSReport:
    statistic: float
    critical: float
    n: int

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical

    def as_dict(self) -> dict:
        return {"ks": self.statistic, "critical": self.critical, "n": self.n, "pass": self.passed}


def verify_eq1_distributional(
    rng: np.random.Generator, spec: DistributionSpec, p: float, b: float, n: int
) -> KSReport:
    """Two-sample KS between ``X`` and the mixture ``b*X1`` (prob ``p``) or ``X2 + b*X1``."""
    if n < 1000:
        raise ValueError("need n >= 1000 for a meaningful KS comparison")
    if not 0 < p < 1 or not 0 < b < 1:
        raise ValueError("p and b must lie in (0, 1)")
    x = spec.sample(rng, n)
    x1 = spec.sample(rng, n)
    x2 = spec.sample(rng, n)
    coin = rng.random(n) < p
    y = np.where(coin, b * x1, x2 + b * x1)
    return KSReport(ks_two_sample(x, y), ks_critical(n, n), n)
