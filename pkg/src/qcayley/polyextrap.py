"""Interpolation nodes, Lagrange extrapolation, fitting and extrapolation bounds.

The bound calculators work in log space because the amplification factors
grow like exp(d log d) and overflow doubles for modest circuit sizes.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import mpmath
import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P

from .constants import TOL
from .errors import DomainError, DuplicateNodes, IllConditioned


@dataclass(frozen=True)
class SampleSet:
    xs: tuple
    ys: tuple

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(self.xs))
        object.__setattr__(self, "ys", tuple(self.ys))
        if len(self.xs) != len(self.ys):
            raise ValueError("xs and ys differ in length")
        if len(set(self.xs)) != len(self.xs):
            raise DuplicateNodes("sample nodes must be distinct")

    @classmethod
    def from_points(cls, points):
        xs, ys = zip(*points) if points else ((), ())
        return cls(xs, ys)

    def __len__(self):
        return len(self.xs)

    def subset(self, idx):
        return SampleSet([self.xs[i] for i in idx], [self.ys[i] for i in idx])


@dataclass(frozen=True)
class BoundQuery:
    d: int
    Delta: float
    epsilon: float = 1.0
    L: int | None = None

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("degree must be >= 1")
        if not 0 < self.Delta <= 1:
            raise DomainError("Delta must lie in (0, 1]")
        if self.epsilon < 0:
            raise DomainError("epsilon must be >= 0")
        if self.L is not None and self.L < self.d + 1:
            raise DomainError("L must be at least d + 1")


class Bound(NamedTuple):
    """A bound stored as its natural log; ``value`` is None on overflow."""

    log: float
    value: float | None

    def __float__(self):
        return math.inf if self.value is None else self.value


def _bound(log_factor: float, eps: float) -> Bound:
    if eps == 0:
        return Bound(-math.inf, 0.0)
    lg = math.log(eps) + log_factor
    try:
        val = math.exp(lg)
    except OverflowError:
        val = None
    return Bound(lg, val)


def nodes_equispaced(d: int, Delta: float) -> list:
    """d + 1 equally spaced nodes -Delta + 2 j Delta / d (exactly symmetric)."""
    if d < 1:
        raise DomainError("d must be >= 1")
    return [Delta * (2 * j - d) / d for j in range(d + 1)]


def nodes_grid(L: int, Delta: float) -> list:
    if L < 2:
        raise DomainError("L must be >= 2")
    return [Delta * (2 * i - L + 1) / (L - 1) for i in range(L)]


def nodes_chebyshev_extrema(d: int, Delta: float) -> list:
    """Delta cos(j pi / d) for j = 0..d, mirrored so x_j = -x_{d-j} exactly."""
    if d < 1:
        raise DomainError("d must be >= 1")
    xs = [0.0] * (d + 1)
    for j in range(d // 2 + 1):
        v = 0.0 if 2 * j == d else Delta * math.cos(j * math.pi / d)
        xs[j], xs[d - j] = v, -v
    return xs


def chebyshev_T(d: int, x):
    """T_d(x) by the three-term recurrence (exact on integers)."""
    if d == 0:
        return 1 + 0 * x
    t0, t1 = 1 + 0 * x, x
    for _ in range(d - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1


def barycentric_weights(xs):
    n = len(xs)
    w = []
    for j in range(n):
        prod = 1
        for k in range(n):
            if k != j:
                prod *= xs[j] - xs[k]
        w.append(1 / prod)
    return w


def lagrange_extrapolate(s: SampleSet, x_star, prec: int | None = None):
    """Value at ``x_star`` of the degree-(|s|-1) interpolant (barycentric, 2nd form).

    With ``prec`` the evaluation runs in mpmath at that many bits and the
    result is an ``mpf``.
    """
    if len(s) < 1:
        raise ValueError("empty sample set")
    if prec is None:
        xs = [float(x) for x in s.xs]
        ys = [float(y) for y in s.ys]
        return _barycentric(xs, ys, float(x_star))
    with mpmath.workprec(prec):
        xs = [mpmath.mpf(x) for x in s.xs]
        ys = [mpmath.mpf(y) for y in s.ys]
        return _barycentric(xs, ys, mpmath.mpf(x_star))


def _barycentric(xs, ys, x):
    for xi, yi in zip(xs, ys):
        if x == xi:
            return yi
    w = barycentric_weights(xs)
    num = 0
    den = 0
    for wj, xj, yj in zip(w, xs, ys):
        t = wj / (x - xj)
        num += t * yj
        den += t
    return num / den


class FitResult(NamedTuple):
    coeffs: np.ndarray  # monomial, ascending powers
    residual: float  # Euclidean norm of y - p(x)
    max_residual: float


def fit_polynomial(s: SampleSet, d: int) -> FitResult:
    """Least-squares polynomial of degree <= d, reported in the monomial basis.

    The fit itself is done in the Chebyshev basis on the node interval;
    only the final coefficients are converted to monomials.
    """
    if len(s) < d + 1:
        raise ValueError(f"need at least {d + 1} samples for degree {d}")
    x = np.asarray(s.xs, dtype=float)
    y = np.asarray(s.ys, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    t = (2 * x - (lo + hi)) / (hi - lo)
    vander = C.chebvander(t, d)
    cond = np.linalg.cond(vander)
    if not np.isfinite(cond) or cond > TOL.fit_max_condition:
        raise IllConditioned(f"Chebyshev design matrix condition {cond:.3e}")
    cheb, *_ = np.linalg.lstsq(vander, y, rcond=None)
    coeffs = C.Chebyshev(cheb, domain=[lo, hi]).convert(kind=np.polynomial.Polynomial).coef
    coeffs = np.pad(coeffs, (0, d + 1 - len(coeffs)))
    r = y - vander @ cheb
    return FitResult(coeffs, float(np.linalg.norm(r)), float(np.max(np.abs(r))))


def poly_eval(coeffs, x):
    return P.polyval(x, coeffs)


def bound_paturi(q: BoundQuery) -> Bound:
    """eps * exp[2d(1 + 1/Delta)]."""
    return _bound(2 * q.d * (1 + 1 / q.Delta), q.epsilon)


def bound_cheb(q: BoundQuery) -> Bound:
    """eps * (2/Delta)^d."""
    return _bound(q.d * math.log(2 / q.Delta), q.epsilon)


def bound_lagrange_equispaced(q: BoundQuery) -> Bound:
    """eps * exp[d(1 + log(1/Delta))] / sqrt(2 pi d)."""
    return _bound(q.d * (1 + math.log(1 / q.Delta)) - 0.5 * math.log(2 * math.pi * q.d),
                  q.epsilon)


def bound_lagrange_subset(q: BoundQuery) -> Bound:
    """eps * exp[d(1 + log((1 + 1/Delta)(L-1)/d))] / sqrt(2 pi d), any d+1 of L grid nodes."""
    if q.L is None:
        raise DomainError("subset bound needs L")
    inner = (1 + 1 / q.Delta) * (q.L - 1) / q.d
    return _bound(q.d * (1 + math.log(inner)) - 0.5 * math.log(2 * math.pi * q.d), q.epsilon)


def bound_paturi_corollary(d: int, Delta: float, x: float) -> float:
    """Multiplier |T_d(1 + (|x| - Delta)/Delta)| valid for |x| >= Delta."""
    if abs(x) < Delta:
        raise DomainError("the multiplier applies only for |x| >= Delta")
    return abs(float(chebyshev_T(d, 1 + (abs(x) - Delta) / Delta)))
