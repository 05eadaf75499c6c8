"""The decision oracle W used by the weak-oracle reduction.

W(d, samples, l, r) is true when some polynomial of degree <= d lies within
tol_i of y_i on at least ``threshold`` samples and takes a value in [l, r)
at x = 1.  Two implementations:

* ``ExactW`` enumerates inlier sets of size ``threshold`` and decides each
  with a phase-one simplex (exhaustive; small L only);
* ``w_oracle_ransac`` samples (d+1)-subsets, and either verifies the
  interpolant directly or refines its consensus set with the same LP.  It is
  one-sided: True always comes with a verified certificate.

Polynomials are handled in the Chebyshev basis of x / s, s = max |x_i|.
The LP unknowns are offsets from a least-squares reference fit measured in
units of the largest tolerance, which keeps the feasibility test meaningful
when tolerances are tiny compared to the sample values.
"""
import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as C

from .constants import TOL
from .errors import TooLarge
from .polyextrap import SampleSet, barycentric_weights
from .simplex import feasible_point

# Certificates from the LP are searched with slightly tightened tolerances so
# they pass the strict verification despite the LP's own slack.
_SHRINK = 1e-7


def ceil_frac(value: float) -> int:
    """Ceiling that ignores float noise such as (1 + 0.2) * 10 / 2 = 6.000000000000001."""
    return math.ceil(round(value, 9))


@dataclass(frozen=True)
class WInstance:
    d: int
    samples: SampleSet
    tol: tuple
    threshold: int
    l: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "tol", tuple(float(t) for t in self.tol))
        if not self.l < self.r:
            raise ValueError("W needs l < r")
        if len(self.tol) != len(self.samples):
            raise ValueError("one tolerance per sample")
        if any(t < 0 for t in self.tol):
            raise ValueError("tolerances must be nonnegative")

    @property
    def L(self) -> int:
        return len(self.samples)

    @property
    def upper(self) -> float:
        """Largest admissible p(1); the half-open end r is pulled in by a fixed margin."""
        return self.r - TOL.w_margin * (self.r - self.l)

    @property
    def scale(self) -> float:
        s = max(abs(float(x)) for x in self.samples.xs)
        return s if s > 0 else 1.0

    def with_interval(self, l: float, r: float) -> "WInstance":
        return WInstance(self.d, self.samples, self.tol, self.threshold, l, r)

    def inliers(self, coeffs) -> list:
        """Indices within tolerance of the monomial-basis polynomial ``coeffs``."""
        x = np.asarray(self.samples.xs, dtype=float)
        y = np.asarray(self.samples.ys, dtype=float)
        res = np.abs(np.polynomial.polynomial.polyval(x, coeffs) - y)
        return [i for i in range(self.L) if res[i] <= self.tol[i]]


def make_w_instance(d, samples: SampleSet, q_sq, epsilon, delta, l=0.0, r=2.0) -> WInstance:
    """Tolerances |Q(x_i)|^2 eps and threshold ceil((1 + delta) L / 2)."""
    tol = [q * epsilon for q in q_sq]
    return WInstance(d, samples, tol, ceil_frac((1 + delta) * len(samples) / 2), l, r)


class WResult(NamedTuple):
    ok: bool
    coeffs: np.ndarray | None = None  # certificate, monomial basis, ascending powers

    def __bool__(self):
        return self.ok


def _to_monomial(cheb, scale):
    return C.Chebyshev(cheb, domain=[-scale, scale]).convert(kind=np.polynomial.Polynomial).coef


class _Arrays:
    """Per-instance arrays in the scaled Chebyshev basis."""

    def __init__(self, w: WInstance):
        self.s = w.scale
        self.x = np.asarray(w.samples.xs, dtype=float) / self.s
        self.y = np.asarray(w.samples.ys, dtype=float)
        self.tol = np.asarray(w.tol)
        self.v = C.chebvander(self.x, w.d)
        self.at1 = C.chebvander(np.array([1.0 / self.s]), w.d)[0]


def _band_lp(arr: _Arrays, subset, lo=None, hi=None, shrink=0.0):
    """Chebyshev coefficients fitting ``subset`` within tolerance (and lo <= p(1) <= hi)."""
    idx = np.asarray(subset)
    v = arr.v[idx]
    y = arr.y[idx]
    tol = arr.tol[idx] * (1 - shrink)
    ref, *_ = np.linalg.lstsq(v, y, rcond=None)
    res = v @ ref - y
    unit = float(tol.max()) if tol.max() > 0 else 1.0
    a = [v, -v]
    b = [(tol - res) / unit, (tol + res) / unit]
    if lo is not None:
        ref1 = float(arr.at1 @ ref)
        span = hi - lo
        lo_s, hi_s = lo + shrink * span, hi - shrink * span
        a += [-arr.at1[None, :], arr.at1[None, :]]
        b += [[-(lo_s - ref1) / unit], [(hi_s - ref1) / unit]]
    z = feasible_point(np.vstack(a), np.concatenate(b), TOL.lp_feasibility)
    return None if z is None else ref + unit * z


class ExactW:
    """Exact W by exhaustive inlier-set enumeration plus LP feasibility.

    Inlier sets whose tolerance bands are infeasible on their own are
    remembered per sample set and skipped on later calls; narrowing [l, r)
    can only remove solutions, so this does not change any answer.
    """

    max_L = 24

    def __init__(self):
        self._band_ok = {}

    def _subsets(self, w, arr):
        key = (w.d, w.samples.xs, w.samples.ys, w.tol, w.threshold)
        if key not in self._band_ok:
            self._band_ok[key] = [
                s for s in itertools.combinations(range(w.L), w.threshold)
                if _band_lp(arr, s) is not None]
        return self._band_ok[key]

    def __call__(self, w: WInstance) -> WResult:
        if w.L > self.max_L or w.threshold < w.d + 1:
            raise TooLarge(f"exact W needs L <= {self.max_L} and threshold >= d+1 "
                           f"(L={w.L}, threshold={w.threshold}, d={w.d})")
        arr = _Arrays(w)
        for subset in self._subsets(w, arr):
            z = _band_lp(arr, subset, w.l, w.upper)
            if z is not None:
                # The decision is made without slack; the certificate is
                # re-solved slightly inside the bands when possible, because
                # a simplex vertex sits exactly on them.
                inner = _band_lp(arr, subset, w.l, w.upper, shrink=_SHRINK)
                return WResult(True, _to_monomial(z if inner is None else inner, arr.s))
        return WResult(False)


def w_oracle_exact(w: WInstance) -> WResult:
    return ExactW()(w)


def _verify(arr: _Arrays, w: WInstance, cheb) -> bool:
    fitted = arr.v @ cheb
    count = int(np.sum(np.abs(fitted - arr.y) <= arr.tol))
    at1 = float(arr.at1 @ cheb)
    return count >= w.threshold and w.l <= at1 <= w.upper


def w_oracle_ransac(w: WInstance, iters: int = 200, rng=None, refine: int = 3) -> WResult:
    """One-sided W from random (d+1)-subset interpolants.

    Each interpolant is accepted if it verifies outright.  Otherwise the
    ``refine`` best distinct consensus sets (the ``threshold`` samples with
    the smallest tolerance-normalized residuals) are handed to the LP, but
    only when the requested interval is reachable: any polynomial within
    tolerance on the interpolation nodes T differs from the interpolant at 1
    by at most Lambda_T(1) * max_T tol.
    """
    rng = np.random.default_rng() if rng is None else rng
    n = w.d + 1
    if w.L < n or w.threshold < n:
        return WResult(False)
    arr = _Arrays(w)
    pick = np.sort(np.argsort(rng.random((iters, w.L)), axis=1)[:, :n], axis=1)
    coef = np.linalg.solve(arr.v[pick], arr.y[pick][..., None])[..., 0]
    fitted = coef @ arr.v.T
    resid = np.abs(fitted - arr.y[None, :])
    at1 = coef @ arr.at1
    inl = np.sum(resid <= arr.tol[None, :], axis=1)
    good = np.flatnonzero((inl >= w.threshold) & (at1 >= w.l) & (at1 <= w.upper))
    if len(good):
        return WResult(True, _to_monomial(coef[good[0]], arr.s))
    if refine <= 0:
        return WResult(False)

    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.where(arr.tol[None, :] > 0, resid / arr.tol[None, :],
                        np.where(resid == 0, 0.0, np.inf))
    order = np.argsort(norm, axis=1, kind="stable")[:, :w.threshold]
    score = np.take_along_axis(norm, order, axis=1).max(axis=1)
    tried = set()
    for k in np.argsort(score, kind="stable"):
        if len(tried) >= refine:
            break
        cons = tuple(sorted(order[k]))
        if cons in tried:
            continue
        tried.add(cons)
        nodes = [float(arr.x[i]) * arr.s for i in pick[k]]
        lam = sum(abs(wj) * math.prod(1 - xl for xl in nodes) / abs(1 - xj)
                  for wj, xj in zip(barycentric_weights(nodes), nodes))
        reach = lam * float(arr.tol[pick[k]].max())
        if at1[k] + reach < w.l or at1[k] - reach > w.upper:
            continue
        z = _band_lp(arr, cons, w.l, w.upper, shrink=_SHRINK)
        if z is not None and _verify(arr, w, z):
            return WResult(True, _to_monomial(z, arr.s))
    return WResult(False)


class RansacW:
    """Callable RANSAC W with its own random stream, for ``reduce_weak``."""

    def __init__(self, iters: int = 200, rng=None, refine: int = 3):
        self.iters = iters
        self.refine = refine
        self.rng = np.random.default_rng() if rng is None else rng

    def __call__(self, w: WInstance) -> WResult:
        return w_oracle_ransac(w, self.iters, self.rng, self.refine)


def intersection_size_check(s_pe, s_ptilde, L: int, delta: float, d: int) -> bool:
    """True iff the two inlier index sets share at least d + 1 points."""
    s1, s2 = set(s_pe), set(s_ptilde)
    if not (s1 | s2) <= set(range(L)):
        raise ValueError("index sets must lie in range(L)")
    return len(s1 & s2) >= d + 1
