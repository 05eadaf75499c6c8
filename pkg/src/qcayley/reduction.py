"""Worst-to-average reductions driven by simulated noisy oracles.

``reduce_strong`` extrapolates oracle values from 8m+1 equispaced nodes in
[-Delta, Delta] to x = 1.  ``reduce_weak`` follows the binary-search
reduction that queries a decision oracle W ("some degree-d polynomial fits
enough samples within tolerance and takes a value in [l, r) at 1").
"""
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .circuits import Circuit, at_x, make_param_circuit
from .constants import DEFAULT_BINARY_ITERS
from .errors import NoFeasiblePolynomial
from .polyextrap import (BoundQuery, SampleSet, bound_lagrange_equispaced,
                         bound_lagrange_subset, chebyshev_T, lagrange_extrapolate,
                         nodes_equispaced, nodes_grid)
from .simulator import probability_zero, q_squared
from .woracle import WInstance, ceil_frac, make_w_instance


# -- noise models -----------------------------------------------------------

@dataclass(frozen=True)
class Exact:
    pass


@dataclass(frozen=True)
class Uniform:
    epsilon: float


@dataclass(frozen=True)
class ChebyshevAdversary:
    """Adds epsilon * T_d(x / Delta): the worst case for Chebyshev-extrema nodes."""

    epsilon: float
    d: int
    Delta: float


@dataclass(frozen=True)
class BernoulliCorrupt:
    """Correct with probability 1 - q, otherwise uniform in [low, high].

    ``mode="independent"`` flips a fresh coin per query; ``"correlated"``
    flips one coin per oracle, so a trial is either clean or fully corrupted.
    """

    q: float
    low: float = 0.0
    high: float = 2.0
    mode: str = "independent"


@dataclass
class NoisyOracle:
    noise: object = field(default_factory=Exact)
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    last_error: float = 0.0

    def __post_init__(self):
        self._trial_corrupt = None
        if isinstance(self.noise, BernoulliCorrupt) and self.noise.mode == "correlated":
            self._trial_corrupt = bool(self.rng.random() < self.noise.q)


def query(o: NoisyOracle, c: Circuit, x: float | None = None):
    """Oracle estimate of |<0^n|c|0^n>|^2 under the oracle's noise model.

    ``x`` is only consulted by position-aware adversaries.  The injected
    error is kept in ``o.last_error``.
    """
    true = probability_zero(c)
    noise = o.noise
    if isinstance(noise, Exact):
        err = 0.0
    elif isinstance(noise, Uniform):
        err = float(o.rng.uniform(-noise.epsilon, noise.epsilon)) if noise.epsilon else 0.0
    elif isinstance(noise, ChebyshevAdversary):
        if x is None:
            raise ValueError("ChebyshevAdversary needs the query position x")
        err = noise.epsilon * float(chebyshev_T(noise.d, x / noise.Delta))
    elif isinstance(noise, BernoulliCorrupt):
        corrupt = (o._trial_corrupt if o._trial_corrupt is not None
                   else bool(o.rng.random() < noise.q))
        if corrupt:
            val = float(o.rng.uniform(noise.low, noise.high))
            o.last_error = val - float(true)
            return val if c.prec is None else mpmath.mpf(val)
        err = 0.0
    else:
        raise TypeError(f"unknown noise model {noise!r}")
    o.last_error = err
    if c.prec is None:
        return float(true) + err
    with mpmath.workprec(c.prec):
        return true + mpmath.mpf(err)


# -- configuration ------------------------------------------------------------

def default_delta(m: int) -> float:
    """Perturbation radius Theta(m^-3)."""
    return 0.5 / m ** 3


@dataclass(frozen=True)
class ReductionConfig:
    Delta: float
    d: int
    delta: float = 0.5
    epsilon: float = 0.0
    L: int | None = None
    binary_iters: int = DEFAULT_BINARY_ITERS
    precision_bits: int | None = None
    # global-phase alignment of the Haar targets; see make_param_circuit
    align_phases: bool = True

    @classmethod
    def for_circuit(cls, m: int, Delta: float | None = None, **kw):
        d = 8 * m
        delta = kw.get("delta", cls.delta)
        kw.setdefault("L", ceil_frac((d + 1) / delta))
        return cls(Delta=default_delta(m) if Delta is None else Delta, d=d, **kw)

    @property
    def grid_size(self) -> int:
        return self.L if self.L is not None else ceil_frac((self.d + 1) / self.delta)

    @property
    def threshold(self) -> int:
        return ceil_frac((1 + self.delta) * self.grid_size / 2)


# -- strong oracle ------------------------------------------------------------

@dataclass
class StrongResult:
    estimate: float
    p_e_at_1: float
    q_sq_at_1: float
    q_sq_at_1_plus_delta: float
    max_q_sq: float
    nodes: list
    values: list

    def bound(self, epsilon: float, d: int, Delta: float) -> float:
        """Per-trial error bound on ``estimate`` for oracle error <= epsilon."""
        b = bound_lagrange_equispaced(BoundQuery(d, Delta, epsilon * self.max_q_sq))
        return float(b) / self.q_sq_at_1


def reduce_strong_detailed(worst: Circuit, o: NoisyOracle, cfg: ReductionConfig, rng) -> StrongResult:
    pc = make_param_circuit(worst, rng, cfg.align_phases)
    prec = cfg.precision_bits
    nodes = nodes_equispaced(cfg.d, cfg.Delta)
    values, qs = [], []
    for x in nodes:
        qx = q_squared(pc, x, prec)
        y = query(o, at_x(pc, x, prec), x)
        if prec is None:
            values.append(y * qx)
        else:
            with mpmath.workprec(prec):
                values.append(y * qx)
        qs.append(float(qx))
    p1 = lagrange_extrapolate(SampleSet(nodes, values), 1.0, prec)
    q1 = q_squared(pc, 1.0, prec)
    if prec is None:
        est = p1 / q1
    else:
        with mpmath.workprec(prec):
            est = p1 / q1
    return StrongResult(
        estimate=float(est), p_e_at_1=float(p1), q_sq_at_1=float(q1),
        q_sq_at_1_plus_delta=float(q_squared(pc, 1.0 + cfg.Delta)),
        max_q_sq=max(qs), nodes=nodes, values=[float(v) for v in values])


def reduce_strong(worst: Circuit, o: NoisyOracle, cfg: ReductionConfig, rng) -> float:
    """Estimate |<0^n|worst|0^n>|^2 by extrapolating from near-random circuits."""
    return reduce_strong_detailed(worst, o, cfg, rng).estimate


# -- weak oracle --------------------------------------------------------------

@dataclass
class WeakResult:
    l: float
    r: float
    certificate: np.ndarray
    inliers: list
    iterations: int
    q_sq_at_1: float = 1.0
    max_q_sq: float = 1.0
    d: int = 0
    L: int = 0

    @property
    def estimate(self) -> float:
        return self.l / self.q_sq_at_1

    def bound(self, epsilon: float, Delta: float) -> float:
        """Error bound on l against p_e(1): subset bound at 2 eps max|Q|^2 plus the search width."""
        b = bound_lagrange_subset(BoundQuery(self.d, Delta, 2 * epsilon * self.max_q_sq, self.L))
        return float(b) + (self.r - self.l)

    def chain_bound(self, epsilon: float, Delta: float, m: int) -> float:
        """eps (2 + O(m Delta)) exp[d(1 + log((1 + 1/Delta)(L-1)/d))] + search width.

        The factor 2 + O(m Delta) is instantiated as (1 + Delta)^{8m} + 1.
        """
        factor = (1 + Delta) ** (8 * m) + 1
        lg = self.d * (1 + math.log((1 + 1 / Delta) * (self.L - 1) / self.d))
        return epsilon * factor * math.exp(lg) + (self.r - self.l)


def binary_search_w(w0: WInstance, w_impl, iters: int = DEFAULT_BINARY_ITERS) -> WeakResult:
    """Bisect [0, 2) keeping W(l, r) true; returns the final bracket and certificate.

    The loop stops early once no float lies strictly between l and r.
    """
    first = w_impl(w0)
    if not first:
        raise NoFeasiblePolynomial("W is false on the initial interval")
    l, r, cert = w0.l, w0.r, first.coeffs
    done = 0
    for done in range(1, iters + 1):
        c = (l + r) / 2
        if not l < c < r:
            done -= 1
            break
        res = w_impl(w0.with_interval(l, c))
        if res:
            r, cert = c, res.coeffs
        else:
            l = c
    return WeakResult(l=l, r=r, certificate=cert, inliers=w0.inliers(cert),
                      iterations=done, d=w0.d, L=w0.L)


def weak_samples(worst: Circuit, o: NoisyOracle, cfg: ReductionConfig, rng):
    """Draw the family and collect (x_i, y_i = O(C(x_i)) |Q(x_i)|^2) on the grid."""
    pc = make_param_circuit(worst, rng, cfg.align_phases)
    nodes = nodes_grid(cfg.grid_size, cfg.Delta)
    ys, qs = [], []
    for x in nodes:
        qx = q_squared(pc, x)
        ys.append(float(query(o, at_x(pc, x), x)) * qx)
        qs.append(qx)
    return pc, SampleSet(nodes, ys), qs


def reduce_weak_detailed(worst: Circuit, o: NoisyOracle, cfg: ReductionConfig, w_impl,
                         rng) -> WeakResult:
    pc, samples, qs = weak_samples(worst, o, cfg, rng)
    w0 = make_w_instance(cfg.d, samples, qs, cfg.epsilon, cfg.delta)
    res = binary_search_w(w0, w_impl, cfg.binary_iters)
    res.q_sq_at_1 = q_squared(pc, 1.0)
    res.max_q_sq = max(qs)
    return res


def reduce_weak(worst: Circuit, o: NoisyOracle, cfg: ReductionConfig, w_impl, rng) -> float:
    """Worst-case probability estimate l / |Q(1)|^2 from the W-oracle bisection."""
    return reduce_weak_detailed(worst, o, cfg, w_impl, rng).estimate
