"""Laplace exponents, transforms and numerical GID certificates.

A law is geometrically infinitely divisible (GID) when its transform has the
form ``1 / (1 + psi)`` with ``psi(0) = 0`` and ``psi'`` completely monotone.
Everything in this module works pointwise on numpy arrays and is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]

PSI_FAMILIES = (
    "power",
    "log_periodic",
    "gamma_exponent",
    "two_param",
    "discrete_sequence",
    "scaled",
    "composite",
)

# default numerical CM certificate settings
CM_GRID = (1e-3, 10.0, 200)
CM_ORDER = 8
CM_REL_STEP = 2.0**-10
CM_TOL = 1e-7


class MalformedTransformError(ValueError):
    """A transform left its admissible range (e.g. q*phi >= 1)."""


def _as_array(s) -> np.ndarray:
    return np.asarray(s, dtype=float)


@dataclass(frozen=True)
class PsiFunction:
    """Exponent ``psi`` of a transform ``1 / (1 + psi)``.

    ``evaluator`` maps non-negative reals to non-negative reals; ``derivative``
    is the analytic ``psi'`` when one is known.
    """

    evaluator: ArrayFn
    family_tag: str
    params: tuple = ()
    derivative: Optional[ArrayFn] = None

    def __post_init__(self):
        if self.family_tag not in PSI_FAMILIES:
            raise ValueError(f"unknown psi family {self.family_tag!r}")

    @property
    def derivative_available(self) -> bool:
        return self.derivative is not None

    def __call__(self, s):
        return self.evaluator(_as_array(s))

    def deriv(self, s) -> np.ndarray:
        """``psi'(s)``, analytic when available, else a central difference."""
        s = _as_array(s)
        if self.derivative is not None:
            return self.derivative(s)
        # step ~ eps^(1/3) balances truncation against rounding
        h = 6e-6 * np.maximum(s, 1e-12)
        return (self.evaluator(s + h) - self.evaluator(s - h)) / (2.0 * h)


@dataclass(frozen=True)
class TransformFn:
    """Evaluable transform with a domain tag.

    ``laplace`` transforms take ``s >= 0``; ``cf_profile`` transforms are real
    characteristic functions evaluated through ``|t|``.
    """

    evaluator: ArrayFn
    domain_tag: str = "laplace"
    source: Optional[PsiFunction] = None

    def __post_init__(self):
        if self.domain_tag not in ("laplace", "cf_profile"):
            raise ValueError(f"unknown domain tag {self.domain_tag!r}")

    def __call__(self, s):
        s = _as_array(s)
        if self.domain_tag == "cf_profile":
            s = np.abs(s)
        return self.evaluator(s)


@dataclass(frozen=True)
class GeometricParams:
    p: float
    q: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not 0.0 < p < 1.0:
            raise ValueError(f"geometric parameter p must lie in (0, 1), got {p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", 1.0 - p)


@dataclass(frozen=True)
class CMReport:
    grid: np.ndarray
    max_order: int
    margin: float
    verdict: str
    tol: float
    failing_order: Optional[int] = None
    failing_point: Optional[float] = None
    diagnostic: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "cm_pass"

    def as_dict(self) -> dict:
        return {
            "grid_min": float(self.grid[0]),
            "grid_max": float(self.grid[-1]),
            "grid_points": int(self.grid.size),
            "max_order": self.max_order,
            "margin": float(self.margin),
            "tol": self.tol,
            "verdict": self.verdict,
            "failing_order": self.failing_order,
            "failing_point": self.failing_point,
        }


@dataclass(frozen=True)
class GIDResult:
    verdict: str
    psi_at_zero: float
    cm: CMReport

    @property
    def passed(self) -> bool:
        return self.verdict == "gid_pass"


def log_grid(lo: float = CM_GRID[0], hi: float = CM_GRID[1], n: int = CM_GRID[2]) -> np.ndarray:
    if not 0 < lo < hi or n < 2:
        raise ValueError("log grid needs 0 < lo < hi and at least 2 points")
    return np.geomspace(lo, hi, n)


# ---------------------------------------------------------------------------
# psi constructors


def _zero_at_origin(fn: ArrayFn) -> ArrayFn:
    def wrapped(s):
        s = _as_array(s)
        out = np.asarray(fn(np.where(s > 0, s, 1.0)), dtype=float)
        return np.where(s > 0, out, 0.0)

    return wrapped


def psi_power(alpha: float, scale: float = 1.0) -> PsiFunction:
    """``psi(s) = (scale*s)**alpha``: Mittag-Leffler (LT) or Linnik (CF)."""
    if alpha <= 0 or scale <= 0:
        raise ValueError("power psi needs alpha > 0 and scale > 0")
    c = scale**alpha
    return PsiFunction(
        _zero_at_origin(lambda s: c * s**alpha),
        "power",
        (alpha, scale),
        _zero_at_origin(lambda s: c * alpha * s ** (alpha - 1.0)),
    )


def psi_gamma_exponent(alpha: float) -> PsiFunction:
    """``psi(s) = (1+s)**alpha - 1`` so that ``1/(1+psi)`` is gamma(alpha)."""
    if alpha <= 0:
        raise ValueError("gamma exponent needs alpha > 0")
    return PsiFunction(
        lambda s: np.expm1(alpha * np.log1p(s)),
        "gamma_exponent",
        (alpha,),
        lambda s: alpha * (1.0 + s) ** (alpha - 1.0),
    )


def psi_two_param(alpha: float, beta: float) -> PsiFunction:
    """``psi(s) = (1+s**alpha)**beta - 1`` for the LT ``(1+s**alpha)**-beta``."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("two-parameter psi needs alpha, beta > 0")

    def value(s):
        return np.expm1(beta * np.log1p(s**alpha))

    def deriv(s):
        return alpha * beta * s ** (alpha - 1.0) * (1.0 + s**alpha) ** (beta - 1.0)

    return PsiFunction(_zero_at_origin(value), "two_param", (alpha, beta), _zero_at_origin(deriv))


def psi_log_periodic(alpha: float, eps: float, b: float) -> PsiFunction:
    """Semi-stable candidate ``s**alpha * (1 + eps*sin(2*pi*ln s / ln(1/b)))``.

    It satisfies ``psi(s) = a*psi(b*s)`` with ``a = b**-alpha`` identically;
    whether it is a Bernstein function is left to :func:`check_gid`.
    """
    if not 0 < b < 1 or alpha <= 0 or abs(eps) >= 1:
        raise ValueError("log-periodic psi needs 0 < b < 1, alpha > 0, |eps| < 1")
    omega = 2.0 * np.pi / np.log(1.0 / b)

    def value(s):
        return s**alpha * (1.0 + eps * np.sin(omega * np.log(s)))

    return PsiFunction(_zero_at_origin(value), "log_periodic", (alpha, eps, b))


def scaled(psi: PsiFunction, c: float) -> PsiFunction:
    """``psi / c`` for ``c > 0``."""
    if c <= 0:
        raise ValueError("scale must be positive")
    d = psi.derivative
    return PsiFunction(
        lambda s: psi.evaluator(s) / c,
        "scaled",
        (*psi.params, c),
        None if d is None else (lambda s: d(s) / c),
    )


# ---------------------------------------------------------------------------
# transform algebra


def lt_from_psi(psi: PsiFunction, domain_tag: str = "laplace") -> TransformFn:
    at0 = float(np.asarray(psi(np.array([0.0])))[0])
    if at0 != 0.0:
        raise ValueError(f"psi(0) must be exactly 0, got {at0!r}")
    return TransformFn(lambda s: 1.0 / (1.0 + psi.evaluator(s)), domain_tag, psi)


def geometric_compound(phi: TransformFn, p) -> TransformFn:
    """Transform of a geometric(p) sum on {1, 2, ...}: ``p*phi / (1 - q*phi)``.

    ``p = 1`` is the identity.
    """
    p = p.p if isinstance(p, GeometricParams) else float(p)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"compounding parameter must lie in (0, 1], got {p}")
    if p == 1.0:
        return phi
    q = 1.0 - p
    if phi.source is not None:
        # same value as p*phi/(1 - q*phi); avoids the cancellation in 1 - q*phi
        src = scaled(phi.source, p)
        return TransformFn(lambda s: 1.0 / (1.0 + src.evaluator(s)), phi.domain_tag, src)

    def evaluate(s):
        v = phi.evaluator(s)
        denom = 1.0 - q * v
        if np.any(denom <= 0):
            raise MalformedTransformError("q*phi(s) >= 1: not a valid transform")
        return p * v / denom

    return TransformFn(evaluate, phi.domain_tag)


def scale_argument(phi: TransformFn, c: float) -> TransformFn:
    """``s -> phi(c*s)``."""
    if c <= 0:
        raise ValueError("argument scale must be positive")
    if c == 1.0:
        return phi
    src = None
    if phi.source is not None:
        psi = phi.source
        d = psi.derivative
        src = PsiFunction(
            lambda s: psi.evaluator(c * s),
            "composite",
            (*psi.params, c),
            None if d is None else (lambda s: c * d(c * s)),
        )
    return TransformFn(lambda s: phi.evaluator(c * s), phi.domain_tag, src)


# ---------------------------------------------------------------------------
# numerical certificates


def check_complete_monotone(
    f: ArrayFn,
    grid=None,
    K: int = CM_ORDER,
    tol: float = CM_TOL,
    rel_step: float = CM_REL_STEP,
) -> CMReport:
    """Finite-difference certificate that ``f`` is completely monotone.

    At each grid point ``s`` with step ``h = rel_step*s`` the forward
    differences ``(-1)**k * Delta_h^k f(s)``, ``k = 0..K``, must be at least
    ``-tol`` times the largest ``|f|`` on the stencil.  Passing is evidence,
    not proof.
    """
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    if K < 2:
        raise ValueError("CM check needs at least order 2")
    if grid.ndim != 1 or grid.size < 1 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("CM grid must be positive and strictly increasing")

    h = rel_step * grid
    stencil = grid[None, :] + np.arange(K + 1)[:, None] * h[None, :]
    with np.errstate(all="ignore"):
        vals = np.asarray(f(stencil), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        return CMReport(
            grid, K, -np.inf, "cm_fail", tol,
            failing_order=None, failing_point=float(grid[bad[1]]),
            diagnostic="non-finite evaluation",
        )

    scale = np.max(np.abs(vals), axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    margins = np.empty((K + 1, grid.size))
    diff = vals
    for k in range(K + 1):
        margins[k] = (-1) ** k * diff[0] / scale
        diff = diff[1:] - diff[:-1]

    k_idx, s_idx = np.unravel_index(np.argmin(margins), margins.shape)
    margin = float(margins[k_idx, s_idx])
    if margin >= -tol:
        return CMReport(grid, K, margin, "cm_pass", tol)
    return CMReport(
        grid, K, margin, "cm_fail", tol,
        failing_order=int(k_idx), failing_point=float(grid[s_idx]),
    )


def check_gid(psi: PsiFunction, grid=None, K: int = CM_ORDER, tol: float = CM_TOL) -> GIDResult:
    """GID iff ``psi(0) = 0`` and ``psi'`` passes the CM certificate."""
    at0 = float(np.asarray(psi(np.array([0.0])))[0])
    report = check_complete_monotone(psi.deriv, grid, K, tol)
    ok = at0 == 0.0 and report.passed
    return GIDResult("gid_pass" if ok else "gid_fail", at0, report)


def semi_scaling_residual(psi: PsiFunction, a: float, b: float, grid=None) -> float:
    """``max |psi(s) - a*psi(b*s)| / (1 + |psi(s)|)`` over the grid."""
    if not 0 < b < 1 < a:
        raise ValueError("semi-stable scaling needs 0 < b < 1 < a")
    s = log_grid() if grid is None else np.asarray(grid, dtype=float)
    v = psi(s)
    return float(np.max(np.abs(v - a * psi(b * s)) / (1.0 + np.abs(v))))


def compound_then_scale(phi: TransformFn, p: float, b: float) -> TransformFn:
    """One step of ``phi -> p*phi(b.)/(1 - q*phi(b.))``."""
    return geometric_compound(scale_argument(phi, b), p)


def compound_then_scale_fixed_point_residual(phi: TransformFn, p: float, b: float, grid=None) -> float:
    """Sup distance on the grid between ``phi`` and its compound-then-scale image.

    Zero exactly when the underlying law solves the geometric fixed-point
    equation ``F(x) = p F(x/b) + q (F*F)(x/b)`` read in transform space.
    """
    if not 0 < p < 1 or not 0 < b < 1:
        raise ValueError("fixed-point residual needs p, b in (0, 1)")
    s = log_grid() if grid is None else np.asarray(grid, dtype=float)
    image = compound_then_scale(phi, p, b)
    return float(np.max(np.abs(phi(s) - image(s))))
