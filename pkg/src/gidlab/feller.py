"""Discrete renewal sequences and GID witnesses for simple random walks.

Sequence transforms use the unit lattice, ``Phi_a(s) = sum_n a_n exp(-s n)``,
so ``s = 0`` corresponds to generating-function argument 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .transform_core import CMReport, PsiFunction, check_gid, log_grid

_EPS = np.finfo(float).eps


class DegenerateWalkError(ValueError):
    """``|p - q| = 0``: the symmetric walk has no normalisable witness."""


@dataclass(frozen=True)
class DiscreteRenewalSequence:
    """``f[n]`` first-occurrence and ``u[n]`` occurrence probabilities, n = 0..N.

    ``f[0]`` is always 0 and ``u[0]`` is 1.
    """

    f: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if f.shape != u.shape or f.ndim != 1:
            raise ValueError("f and u must be 1-d arrays of the same length")
        if f[0] != 0 or u[0] != 1:
            raise ValueError("need f_0 = 0 and u_0 = 1")
        if np.any(f < 0) or np.any(f > 1) or np.any(u < 0) or np.any(u > 1 + 1e-12):
            raise ValueError("entries must lie in [0, 1]")
        if f.sum() > 1 + 1e-12:
            raise ValueError("sum of f exceeds 1")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "u", u)

    @property
    def N(self) -> int:
        return self.f.size - 1

    @property
    def f_total(self) -> float:
        return float(self.f.sum())

    @property
    def transient(self) -> bool:
        return self.f_total < 1.0

    def recursion_residual(self) -> float:
        """``max_n |u_n - sum_k f_k u_{n-k}|`` for n >= 1."""
        conv = np.convolve(self.f, self.u)[: self.u.size]
        return float(np.max(np.abs(self.u[1:] - conv[1:]))) if self.N else 0.0

    def transform(self, which: str, s) -> np.ndarray:
        a = self.f if which == "f" else self.u
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.exp(-np.outer(s, np.arange(a.size))) @ a

    def identity_error(self, s) -> np.ndarray:
        """``|Phi_u (1 - Phi_f) - 1|`` on ``s``."""
        return np.abs(self.transform("u", s) * (1.0 - self.transform("f", s)) - 1.0)

    def identity_bound(self, s) -> np.ndarray:
        """Truncation bound ``e^{-s(N+1)}/(1 - e^{-s})`` plus rounding allowance."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        tail = np.exp(-s * (self.N + 1)) / -np.expm1(-s)
        pu, pf = self.transform("u", s), self.transform("f", s)
        return tail + 8 * self.N * _EPS * pu * (1.0 + pf) + 4 * _EPS

    def to_rows(self):
        return [(n, float(self.f[n]), float(self.u[n])) for n in range(self.f.size)]


def u_from_f(f, N: int | None = None) -> DiscreteRenewalSequence:
    """Occurrence probabilities from first-occurrence ones.

    ``f`` is indexed from 1 (``f[0]`` is the probability for trial 1) unless
    it already has a leading zero of length ``N + 1``.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("negative first-occurrence probability")
    if f.sum() > 1 + 1e-12:
        raise ValueError("sum of f exceeds 1")
    N = f.size if N is None else int(N)
    full = np.zeros(N + 1)
    k = min(f.size, N)
    full[1 : k + 1] = f[:k]
    u = np.zeros(N + 1)
    u[0] = 1.0
    for n in range(1, N + 1):
        u[n] = full[1 : n + 1] @ u[n - 1 :: -1][:n]
    return DiscreteRenewalSequence(full, u)


def _check_walk(p_walk: float) -> float:
    if not 0.0 < p_walk < 1.0:
        raise ValueError("walk step probability must lie in (0, 1)")
    return 1.0 - p_walk


def _log_pq(p_walk: float) -> float:
    return float(np.log(p_walk) + np.log1p(-p_walk))


def walk_return_f(p_walk: float, N: int) -> np.ndarray:
    """First-return probabilities ``f_{2n} = 2 Cat_{n-1} (pq)^n`` on 0..N."""
    _check_walk(p_walk)
    f = np.zeros(N + 1)
    n = np.arange(1, N // 2 + 1)
    # Cat_{n-1} = C(2n-2, n-1) / n
    log_cat = gammaln(2 * n - 1) - 2 * gammaln(n) - np.log(n)
    f[2 * n] = 2.0 * np.exp(log_cat + n * _log_pq(p_walk))
    return f


def walk_sequences(p_walk: float, N: int) -> DiscreteRenewalSequence:
    """Return-to-origin sequences of the simple walk, ``u_{2n} = C(2n,n)(pq)^n``."""
    _check_walk(p_walk)
    u = np.zeros(N + 1)
    n = np.arange(0, N // 2 + 1)
    u[2 * n] = np.exp(gammaln(2 * n + 1) - 2 * gammaln(n + 1) + n * _log_pq(p_walk))
    seq = DiscreteRenewalSequence(walk_return_f(p_walk, N), u)
    if seq.recursion_residual() > 1e-12:
        raise ArithmeticError("closed-form walk sequences violate the renewal recursion")
    return seq


def walk_U(p_walk: float, s) -> np.ndarray:
    """``U(s) = 1 / sqrt(1 - 4pq e^{-2s})``."""
    q = _check_walk(p_walk)
    s = np.asarray(s, dtype=float)
    return 1.0 / np.sqrt(1.0 - 4 * p_walk * q * np.exp(-2 * s))


def walk_U_bound(p_walk: float, s, N: int) -> np.ndarray:
    """Tail bound ``x^{M+1}/(1 - x)``, ``x = 4pq e^{-2s}``, ``M = N // 2``."""
    q = _check_walk(p_walk)
    x = 4 * p_walk * q * np.exp(-2 * np.asarray(s, dtype=float))
    return x ** (N // 2 + 1) / (1.0 - x) + 16 * _EPS / np.sqrt(1.0 - x)


def walk_Ubar(p_walk: float, s) -> np.ndarray:
    """``(1 - sqrt(1 - 4pq e^{-2s})) / (2pq e^{-2s})`` in cancellation-free form."""
    q = _check_walk(p_walk)
    x = 4 * p_walk * q * np.exp(-2 * np.asarray(s, dtype=float))
    return 2.0 / (1.0 + np.sqrt(1.0 - x))


def catalan_coefficients(p_walk: float, N: int) -> np.ndarray:
    """Coefficients ``Cat_n (pq)^n`` of ``Ubar`` at lattice points 2n <= N."""
    _check_walk(p_walk)
    c = np.zeros(N + 1)
    n = np.arange(0, N // 2 + 1)
    c[2 * n] = np.exp(gammaln(2 * n + 1) - gammaln(n + 1) - gammaln(n + 2) + n * _log_pq(p_walk))
    return c


@dataclass(frozen=True)
class Witness:
    psi: PsiFunction
    psi_at_zero: float
    cm: CMReport
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "gid_pass"

    def as_dict(self) -> dict:
        return {"psi_at_zero": self.psi_at_zero, "verdict": self.verdict, "cm": self.cm.as_dict()}


def _witness(psi: PsiFunction, grid, K: int) -> Witness:
    grid = log_grid() if grid is None else grid
    res = check_gid(psi, grid, K)
    return Witness(psi, res.psi_at_zero, res.cm, res.verdict)


def transient_psi(f) -> PsiFunction:
    """``psi = (q/p)(1 - omega)`` with ``omega = Phi_f / q``, ``q = sum f``."""
    f = np.asarray(f, dtype=float)
    q = float(f.sum())
    if q >= 1.0:
        raise ValueError("recurrent event (sum f = 1): no transient witness")
    if q <= 0.0:
        raise ValueError("event never occurs (sum f = 0)")
    p = 1.0 - q
    n = np.arange(f.size)

    def value(s):
        s = np.asarray(s, dtype=float)
        # 1 - omega(s) = sum f_n (1 - e^{-sn}) / q, exact at s = 0
        return (-np.expm1(-np.multiply.outer(s, n)) @ f) / p

    def deriv(s):
        s = np.asarray(s, dtype=float)
        return np.exp(-np.multiply.outer(s, n)) @ (n * f) / p

    return PsiFunction(value, "discrete_sequence", (q,), deriv)


def gid_witness_transient(f, grid=None, K: int = 8) -> Witness:
    """GID certificate for ``p * Phi_u`` of a transient discrete renewal event."""
    seq_f = f.f if isinstance(f, DiscreteRenewalSequence) else f
    return _witness(transient_psi(seq_f), grid, K)


def ex42_psi(p_walk: float) -> PsiFunction:
    q = _check_walk(p_walk)
    d = abs(p_walk - q)
    if d == 0.0:
        raise DegenerateWalkError("p_walk = 1/2 makes |p - q| = 0; |p-q| U(s) is not normalisable")
    c = 4 * p_walk * q

    def value(s):
        s = np.asarray(s, dtype=float)
        # sqrt(1 - c e^{-2s}) - d, written to stay exact at s = 0 where d^2 = 1 - c
        x = -c * np.expm1(-2 * s)
        return (x / (np.sqrt(1.0 - c * np.exp(-2 * s)) + d)) / d

    def deriv(s):
        e = c * np.exp(-2 * np.asarray(s, dtype=float))
        return e / (d * np.sqrt(1.0 - e))

    return PsiFunction(value, "composite", (p_walk,), deriv)


def gid_witness_ex42(p_walk: float, grid=None, K: int = 8) -> Witness:
    """GID certificate for ``|p - q| U(s)``: ``psi = sqrt(1 - 4pq e^{-2s})/|p-q| - 1``."""
    return _witness(ex42_psi(p_walk), grid, K)


def ex43_psi(p_walk: float) -> PsiFunction:
    q = _check_walk(p_walk)
    c = 4 * p_walk * q

    d = abs(p_walk - q)

    def value(s):
        # 1/(p Ubar) - 1 = (sqrt(1 - c e^{-2s}) - (p - q)) / (2p), with the root
        # split as |p - q| + x/(root + |p - q|) so psi(0) is exact
        s = np.asarray(s, dtype=float)
        x = -c * np.expm1(-2 * s)
        root = np.sqrt(1.0 - c * np.exp(-2 * s))
        den = root + d
        split = np.divide(x, den, out=np.zeros_like(x), where=den > 0)
        return (d - (p_walk - q) + split) / (2 * p_walk)

    def deriv(s):
        e = c * np.exp(-2 * np.asarray(s, dtype=float))
        return e / (2 * p_walk * np.sqrt(1.0 - e))

    return PsiFunction(value, "composite", (p_walk,), deriv)


def gid_witness_ex43(p_walk: float, grid=None, K: int = 8) -> Witness:
    """GID certificate for ``p Ubar(s)``.

    ``psi(0) = 0`` needs ``p_walk >= 1/2``; below that the report carries the
    nonzero ``psi(0)`` and a failing verdict.
    """
    return _witness(ex43_psi(p_walk), grid, K)
