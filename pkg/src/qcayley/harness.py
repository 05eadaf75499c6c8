"""Seeded experiments behind the ``qcayley`` command line.

Every experiment takes an ``ExperimentConfig`` and returns an
``ExperimentOutput``: a list of JSON-ready result records (each holding the
measured quantity, the bound it is tested against and a pass flag) plus the
rows of a flat CSV table.  Column layouts are documented in docs/formats.md.

Trials draw from independent RNG substreams keyed by (seed, trial), so
results do not depend on ``jobs`` or on scheduling order.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import mpmath
import numpy as np
from scipy.stats import binom

from . import sharpp
from .circuits import (Architecture, haar_unitary_batch, make_param_circuit,
                       preset_arch, sample_circuit)
from .constants import DEFAULT_BINARY_ITERS, DEFAULT_PRECISION_BITS, MAX_QUBITS
from .errors import (Ambiguous, BadShape, ConfigError, NoFeasiblePolynomial, ParseError,
                     TooManyQubits, TooManyWitnessBits)
from .linalg import eig_unitary_batch
from .polyextrap import (Bound, BoundQuery, SampleSet, bound_cheb, bound_lagrange_equispaced,
                         bound_lagrange_subset, bound_paturi, chebyshev_T, lagrange_extrapolate,
                         nodes_chebyshev_extrema, nodes_equispaced, nodes_grid)
from .reduction import (BernoulliCorrupt, ChebyshevAdversary, Exact, NoisyOracle,
                        ReductionConfig, Uniform, binary_search_w, default_delta,
                        reduce_strong_detailed, reduce_weak_detailed)
from .simulator import p_e, probability_zero
from .woracle import ExactW, RansacW, ceil_frac, make_w_instance

EXPERIMENTS = ("bounds-sweep", "strong-reduction", "weak-reduction", "chebyshev-saturation",
               "sharp-p", "concentration", "tvd-proxy", "degree-check")
NOISE_MODELS = ("exact", "uniform", "chebyshev", "bernoulli", "bernoulli-correlated")


# -- configuration ------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    trials: int | None = None  # None: per-experiment default
    jobs: int = 1
    precision_bits: int | None = None  # None: per-experiment default
    out: str = "results"
    # circuits
    arch: str = "line-brickwork"
    m: int = 2
    n: int = 3
    # reductions
    Delta: float | None = None  # None: 0.5 / m^3
    delta: float = 0.5
    epsilon: float = 0.0
    noise: str = "exact"
    q: float = 0.1  # corruption rate of the bernoulli models
    L: int | None = None
    d: int | None = None
    w: str = "exact"
    ransac_iters: int = 200
    binary_iters: int = DEFAULT_BINARY_ITERS
    synthetic: bool = False
    corrupt: int = 2
    rtol: float = 1e-10
    # sweeps
    deltas: list | None = None
    degrees: list | None = None
    Ls: list | None = None
    # sharp-p
    p: int = 3
    mu: float = 1.0
    table_file: str | None = None
    exhaustive: bool | None = None
    # concentration / tvd-proxy
    c_tvd: float = 0.0
    samples: int = 100_000
    bins: int = 64
    bootstrap: int = 50

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - names)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        if "experiment" not in doc:
            raise ConfigError("missing field 'experiment'")
        try:
            cfg = cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.experiment in EXPERIMENTS, f"unknown experiment {self.experiment!r}")
        need(self.noise in NOISE_MODELS, f"unknown noise model {self.noise!r}")
        need(self.w in ("exact", "ransac"), f"unknown W implementation {self.w!r}")
        need(self.arch in ("line-brickwork", "grid"), f"unknown architecture {self.arch!r}")
        need(self.trials is None or self.trials >= 1, "trials must be >= 1")
        need(self.jobs >= 1, "jobs must be >= 1")
        need(self.precision_bits is None or self.precision_bits >= 53,
             "precision_bits must be >= 53")
        need(self.m >= 1, "m must be >= 1")
        need(2 <= self.n <= MAX_QUBITS, f"n must lie in [2, {MAX_QUBITS}]")
        need(self.Delta is None or 0 < self.Delta <= 1, "Delta must lie in (0, 1]")
        need(0 < self.delta < 1, "delta must lie in (0, 1)")
        need(self.epsilon >= 0, "epsilon must be >= 0")
        need(0 <= self.q <= 1, "q must lie in [0, 1]")
        need(self.mu > 0, "mu must be positive")
        need(0 <= self.p <= sharpp.MAX_AUGMENT_BITS, f"p must lie in [0, {sharpp.MAX_AUGMENT_BITS}]")
        need(self.samples >= 10 and self.bins >= 2 and self.bootstrap >= 2,
             "samples >= 10, bins >= 2 and bootstrap >= 2 required")
        need(self.L is None or self.L >= 2, "L must be >= 2")
        need(self.d is None or self.d >= 1, "d must be >= 1")
        for name in ("deltas", "degrees", "Ls"):
            val = getattr(self, name)
            need(val is None or (isinstance(val, list) and len(val) > 0),
                 f"{name} must be a non-empty list")
        need(self.c_tvd >= 0, "c_tvd must be >= 0")
        need(self.corrupt >= 0, "corrupt must be >= 0")

    def trials_or(self, default: int) -> int:
        return default if self.trials is None else self.trials

    @property
    def Delta_or_default(self) -> float:
        return default_delta(self.m) if self.Delta is None else self.Delta


@dataclass
class ExperimentOutput:
    records: list
    columns: list
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.records)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _map_trials(fn, cfg: ExperimentConfig, count: int) -> list:
    """fn(cfg, trial) for each trial, merged in trial order."""
    if cfg.jobs == 1 or count == 1:
        return [fn(cfg, t) for t in range(count)]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(fn, [cfg] * count, range(count)))


def bound_fields(name: str, b) -> dict:
    """A bound as JSON fields; overflowing bounds keep only their log."""
    if isinstance(b, Bound):
        return {name: b.value, f"log_{name}": b.log}
    b = float(b)
    if math.isfinite(b):
        return {name: b, f"log_{name}": math.log(b) if b > 0 else None}
    return {name: None, f"log_{name}": None}


def _record(cfg, trial, inputs, measured, bound, passed, started) -> dict:
    return {"experiment": cfg.experiment, "seed": cfg.seed, "trial": trial,
            "inputs": inputs, "measured": measured, "bound": bound, "passed": bool(passed),
            "wall_time": time.perf_counter() - started}


def arch_for(kind: str, n: int, m: int) -> Architecture:
    """First m slots of the named nearest-neighbour layout."""
    per_layer = len(preset_arch(kind, n, 2).slots)
    depth = 2 * (m // max(per_layer, 1) + 1)
    return Architecture(n, preset_arch(kind, n, depth).slots[:m])


def make_noise(cfg: ExperimentConfig, d: int, Delta: float):
    if cfg.noise == "exact":
        return Exact()
    if cfg.noise == "uniform":
        return Uniform(cfg.epsilon)
    if cfg.noise == "chebyshev":
        return ChebyshevAdversary(cfg.epsilon, d, Delta)
    mode = "correlated" if cfg.noise == "bernoulli-correlated" else "independent"
    return BernoulliCorrupt(cfg.q, mode=mode)


# -- bounds-sweep ---------------------------------------------------------------

def _random_signs(rng, k, eps):
    return list(eps * rng.choice([-1.0, 1.0], size=k) * rng.uniform(0.5, 1.0, size=k))


def bounds_sweep(cfg: ExperimentConfig) -> ExperimentOutput:
    """All four extrapolation bounds per (d, Delta), tested against random data.

    Random values in [-eps, eps] (eps = 1) at the equispaced nodes, and at
    random (d+1)-subsets of an L-grid, are extrapolated to x = 1 and compared
    with the equispaced and subset bounds.
    """
    degrees = cfg.degrees or [2, 4, 8, 16]
    deltas = cfg.deltas or [0.1, 0.3, 0.5]
    trials = cfg.trials_or(200)
    prec = cfg.precision_bits or 128
    cols = ["d", "Delta", "L", "log_paturi", "log_cheb", "log_equispaced", "log_subset",
            "max_equispaced", "max_subset", "passed"]
    out = ExperimentOutput([], cols)
    for i, (d, Delta) in enumerate((d, D) for d in degrees for D in deltas):
        t0 = time.perf_counter()
        d, Delta = int(d), float(Delta)
        L = cfg.L if cfg.L is not None else 2 * d + 1
        if L < d + 1:
            raise ConfigError(f"L={L} is smaller than d+1={d + 1}")
        q = BoundQuery(d, Delta, 1.0, L)
        b_eq, b_sub = bound_lagrange_equispaced(q), bound_lagrange_subset(q)
        rng = trial_rng(cfg.seed, i)
        xs = nodes_equispaced(d, Delta)
        grid = nodes_grid(L, Delta)
        worst_eq = worst_sub = 0.0
        for _ in range(trials):
            ys = _random_signs(rng, d + 1, 1.0)
            worst_eq = max(worst_eq, abs(float(lagrange_extrapolate(SampleSet(xs, ys), 1.0, prec))))
            idx = sorted(rng.choice(L, size=d + 1, replace=False))
            sub = SampleSet([grid[j] for j in idx], _random_signs(rng, d + 1, 1.0))
            worst_sub = max(worst_sub, abs(float(lagrange_extrapolate(sub, 1.0, prec))))
        ok = worst_eq <= float(b_eq) and worst_sub <= float(b_sub)
        bounds = {**bound_fields("paturi", bound_paturi(q)), **bound_fields("cheb", bound_cheb(q)),
                  **bound_fields("equispaced", b_eq), **bound_fields("subset", b_sub)}
        out.records.append(_record(
            cfg, i, {"d": d, "Delta": Delta, "L": L, "epsilon": 1.0, "trials": trials},
            {"max_equispaced": worst_eq, "max_subset": worst_sub}, bounds, ok, t0))
        out.rows.append([d, Delta, L, bounds["log_paturi"], bounds["log_cheb"],
                         bounds["log_equispaced"], bounds["log_subset"], worst_eq, worst_sub, ok])
    return out


# -- chebyshev-saturation -------------------------------------------------------

def saturation_value(d: int, Delta: float, eps: float = 1.0, prec: int = DEFAULT_PRECISION_BITS):
    """Extrapolation to 1 of eps T_d(x/Delta) sampled at the Chebyshev extrema."""
    xs = nodes_chebyshev_extrema(d, Delta)
    with mpmath.workprec(prec):
        ys = [eps * chebyshev_T(d, mpmath.mpf(x) / mpmath.mpf(Delta)) for x in xs]
        exact = eps * chebyshev_T(d, 1 / mpmath.mpf(Delta))
    return lagrange_extrapolate(SampleSet(xs, ys), 1.0, prec), exact


def chebyshev_saturation(cfg: ExperimentConfig) -> ExperimentOutput:
    """Chebyshev-extrema data bounded by eps reaches eps T_d(1/Delta) at x = 1."""
    degrees = cfg.degrees or [2, 4, 8, 16]
    deltas = cfg.deltas or [0.1, 0.3, 0.5]
    prec = cfg.precision_bits or DEFAULT_PRECISION_BITS
    eps = cfg.epsilon or 1.0
    cols = ["d", "Delta", "extrapolated", "eps_T_d", "ratio_to_T_d", "log_cheb",
            "ratio_to_cheb", "passed"]
    out = ExperimentOutput([], cols)
    for i, (d, Delta) in enumerate((d, D) for d in degrees for D in deltas):
        t0 = time.perf_counter()
        d, Delta = int(d), float(Delta)
        got, exact = saturation_value(d, Delta, eps, prec)
        with mpmath.workprec(prec):
            rel = float(abs(got - exact) / abs(exact))
            ratio = float(abs(got) / abs(exact))
        b = bound_cheb(BoundQuery(d, Delta, eps))
        ratio_cheb = math.exp(math.log(abs(float(got))) - b.log)
        ok = ratio >= 0.5 and rel <= 1e-9 and ratio_cheb <= 1.0
        out.records.append(_record(
            cfg, i, {"d": d, "Delta": Delta, "epsilon": eps, "precision_bits": prec},
            {"extrapolated": float(got), "relative_error": rel, "ratio_to_T_d": ratio,
             "ratio_to_cheb": ratio_cheb},
            {"eps_T_d": float(exact), **bound_fields("cheb", b)}, ok, t0))
        out.rows.append([d, Delta, float(got), float(exact), ratio, b.log, ratio_cheb, ok])
    return out


# -- degree-check ---------------------------------------------------------------

def degree_check_trial(cfg: ExperimentConfig, trial: int) -> dict:
    """Interpolate p_e from 8m+1 Chebyshev nodes on [-1/2, 1/2]; compare at 10 fresh points."""
    t0 = time.perf_counter()
    rng = trial_rng(cfg.seed, trial)
    prec = cfg.precision_bits or (DEFAULT_PRECISION_BITS if cfg.m >= 3 else None)
    worst = sample_circuit(arch_for(cfg.arch, cfg.n, cfg.m), rng)
    pc = make_param_circuit(worst, rng)
    nodes = nodes_chebyshev_extrema(pc.degree, 0.5)
    samples = SampleSet(nodes, [p_e(pc, x, prec) for x in nodes])
    worst_rel = 0.0
    for x in rng.uniform(-0.5, 0.5, size=10):
        got = lagrange_extrapolate(samples, float(x), prec)
        want = p_e(pc, float(x), prec)
        if prec is None:
            rel = abs(got - want) / abs(want)
        else:
            with mpmath.workprec(prec):
                rel = float(abs(got - want) / abs(want))
        worst_rel = max(worst_rel, rel)
    return _record(cfg, trial, {"m": cfg.m, "n": cfg.n, "arch": cfg.arch, "degree": pc.degree,
                                "precision_bits": prec},
                   {"max_relative_error": worst_rel}, {"relative_tolerance": 1e-7},
                   worst_rel <= 1e-7, t0)


def degree_check(cfg: ExperimentConfig) -> ExperimentOutput:
    recs = _map_trials(degree_check_trial, cfg, cfg.trials_or(20))
    rows = [[r["trial"], cfg.m, cfg.n, r["inputs"]["degree"], r["measured"]["max_relative_error"],
             r["passed"]] for r in recs]
    return ExperimentOutput(recs, ["trial", "m", "n", "degree", "max_relative_error", "passed"], rows)


# -- strong-reduction -----------------------------------------------------------

def strong_trial(cfg: ExperimentConfig, trial: int) -> dict:
    t0 = time.perf_counter()
    rng = trial_rng(cfg.seed, trial)
    m, Delta = cfg.m, cfg.Delta_or_default
    prec = cfg.precision_bits or (DEFAULT_PRECISION_BITS if m >= 2 else None)
    rcfg = ReductionConfig.for_circuit(m, Delta, precision_bits=prec, epsilon=cfg.epsilon)
    worst = sample_circuit(arch_for(cfg.arch, cfg.n, m), rng)
    oracle = NoisyOracle(make_noise(cfg, rcfg.d, Delta), np.random.default_rng(rng.integers(2**63)))
    res = reduce_strong_detailed(worst, oracle, rcfg, rng)
    direct = float(probability_zero(worst))
    err = abs(res.estimate - direct)
    bound = {}
    if cfg.noise == "exact":
        tol = cfg.rtol * max(abs(direct), 1e-300)
        ok = err <= tol
        bound["absolute_tolerance"] = tol
    else:
        b = res.bound(cfg.epsilon, rcfg.d, Delta)
        ok = err <= b
        bound.update(bound_fields("chain", b))
        env = float(bound_lagrange_equispaced(
            BoundQuery(rcfg.d, Delta, cfg.epsilon * (1 + Delta) ** rcfg.d))) / res.q_sq_at_1
        lit = float(bound_lagrange_equispaced(
            BoundQuery(rcfg.d, Delta, cfg.epsilon * res.q_sq_at_1_plus_delta))) / res.q_sq_at_1
        bound.update(bound_fields("envelope", env))
        bound.update(bound_fields("q_1_plus_Delta", lit))
    return _record(
        cfg, trial, {"m": m, "n": cfg.n, "arch": cfg.arch, "Delta": Delta, "epsilon": cfg.epsilon,
                     "noise": cfg.noise, "precision_bits": prec},
        {"estimate": res.estimate, "direct": direct, "error": err,
         "relative_error": err / abs(direct) if direct else None,
         "q_sq_at_1": res.q_sq_at_1, "q_sq_at_1_plus_Delta": res.q_sq_at_1_plus_delta,
         "max_q_sq": res.max_q_sq}, bound, ok, t0)


def strong_reduction(cfg: ExperimentConfig) -> ExperimentOutput:
    recs = _map_trials(strong_trial, cfg, cfg.trials_or(10))
    rows = []
    for r in recs:
        b = r["bound"]
        rows.append([r["trial"], cfg.m, cfg.n, r["inputs"]["Delta"], cfg.epsilon, cfg.noise,
                     r["measured"]["estimate"], r["measured"]["direct"], r["measured"]["error"],
                     b.get("chain", b.get("absolute_tolerance")), r["passed"]])
    cols = ["trial", "m", "n", "Delta", "epsilon", "noise", "estimate", "direct", "error",
            "bound", "passed"]
    return ExperimentOutput(recs, cols, rows)


# -- weak-reduction -------------------------------------------------------------

def synthetic_weak_instance(rng, d: int, L: int, Delta: float, epsilon: float, corrupt: int,
                            delta: float):
    """Degree-d polynomial on an L-grid with noise <= epsilon and ``corrupt`` outliers.

    Returns (W instance on [0, 2), true value at 1, corrupted indices).
    """
    for _ in range(1000):
        coef = rng.uniform(-0.2, 0.2, size=d + 1)
        coef[0] = rng.uniform(0.4, 0.8)
        truth = float(np.polynomial.polynomial.polyval(1.0, coef))
        if 0.0 <= truth < 2.0:
            break
    xs = nodes_grid(L, Delta)
    ys = np.polynomial.polynomial.polyval(xs, coef) + rng.uniform(-epsilon, epsilon, size=L)
    bad = rng.choice(L, size=corrupt, replace=False)
    ys[bad] += rng.choice([-1.0, 1.0], size=corrupt) * rng.uniform(0.05, 0.5, size=corrupt)
    w = make_w_instance(d, SampleSet(xs, [float(y) for y in ys]), [1.0] * L, epsilon, delta)
    return w, truth, sorted(int(b) for b in bad)


def _w_impl(cfg, rng):
    return ExactW() if cfg.w == "exact" else RansacW(cfg.ransac_iters, rng)


def weak_trial(cfg: ExperimentConfig, trial: int) -> dict:
    t0 = time.perf_counter()
    rng = trial_rng(cfg.seed, trial)
    eps = cfg.epsilon
    inputs = {"w": cfg.w, "epsilon": eps, "delta": cfg.delta, "synthetic": cfg.synthetic}
    try:
        if cfg.synthetic:
            d = cfg.d or 4
            L = cfg.L or 10
            Delta = cfg.Delta if cfg.Delta is not None else 0.5
            w0, truth, bad = synthetic_weak_instance(rng, d, L, Delta, eps, cfg.corrupt, cfg.delta)
            res = binary_search_w(w0, _w_impl(cfg, rng), cfg.binary_iters)
            res.q_sq_at_1, res.max_q_sq = 1.0, 1.0
            inputs.update({"d": d, "L": L, "Delta": Delta, "corrupt": cfg.corrupt})
            extra = {"corrupted": bad}
        else:
            Delta = cfg.Delta_or_default
            rcfg = ReductionConfig.for_circuit(cfg.m, Delta, delta=cfg.delta, epsilon=eps, L=cfg.L,
                                               binary_iters=cfg.binary_iters)
            d, L = rcfg.d, rcfg.grid_size
            worst = sample_circuit(arch_for(cfg.arch, cfg.n, cfg.m), rng)
            oracle = NoisyOracle(make_noise(cfg, d, Delta),
                                 np.random.default_rng(rng.integers(2**63)))
            res = reduce_weak_detailed(worst, oracle, rcfg, _w_impl(cfg, rng), rng)
            truth = float(probability_zero(worst)) * res.q_sq_at_1
            inputs.update({"m": cfg.m, "n": cfg.n, "d": d, "L": L, "Delta": Delta,
                           "noise": cfg.noise, "q": cfg.q})
            extra = {}
    except NoFeasiblePolynomial as exc:
        return _record(cfg, trial, inputs, {"error": None, "failure": str(exc)}, {}, False, t0)
    err = abs(res.l - truth)
    b = res.bound(eps, inputs["Delta"])
    return _record(cfg, trial, inputs,
                   {"l": res.l, "r": res.r, "p_e_at_1": truth, "error": err,
                    "iterations": res.iterations, "inliers": len(res.inliers),
                    "q_sq_at_1": res.q_sq_at_1, "max_q_sq": res.max_q_sq, **extra},
                   {**bound_fields("subset_plus_width", b)}, err <= b, t0)


def weak_reduction(cfg: ExperimentConfig) -> ExperimentOutput:
    recs = _map_trials(weak_trial, cfg, cfg.trials_or(10))
    rows = [[r["trial"], r["inputs"]["d"] if "d" in r["inputs"] else None,
             r["inputs"].get("L"), r["measured"].get("l"), r["measured"].get("p_e_at_1"),
             r["measured"].get("error"), r["bound"].get("subset_plus_width"), r["passed"]]
            for r in recs]
    cols = ["trial", "d", "L", "l", "p_e_at_1", "error", "bound", "passed"]
    return ExperimentOutput(recs, cols, rows)


# -- sharp-p --------------------------------------------------------------------

def sharp_p_instances(cfg: ExperimentConfig):
    if cfg.table_file:
        try:
            with open(cfg.table_file) as fh:
                return [sharpp.parse_table(fh.read())]
        except OSError as exc:
            raise ConfigError(f"cannot read table file: {exc}") from exc
        except ParseError as exc:
            raise ConfigError(f"{cfg.table_file}: {exc}") from exc
    exhaustive = cfg.exhaustive if cfg.exhaustive is not None else cfg.p <= 3
    if exhaustive:
        if cfg.p > 4:
            raise ConfigError("exhaustive enumeration is limited to p <= 4")
        return [sharpp.CountingInstance.from_int(cfg.p, b) for b in range(2 ** 2 ** cfg.p)]
    rng = trial_rng(cfg.seed, 0)
    return [sharpp.CountingInstance(cfg.p, rng.integers(0, 2, size=2 ** cfg.p))
            for _ in range(cfg.trials_or(100))]


def sharp_p(cfg: ExperimentConfig) -> ExperimentOutput:
    """Recover popcounts from one oracle query each.

    A record passes when the count is exact, or, if the injected error
    reached the decoding radius, when the decoder either reported
    ``Ambiguous`` or returned a count consistent with the noisy value.
    """
    insts = sharp_p_instances(cfg)
    noise = make_noise(cfg, 0, 1.0)
    oracle = NoisyOracle(noise, trial_rng(cfg.seed, 1))
    cols = ["trial", "p", "count", "decoded", "injected_error", "radius", "status", "passed"]
    out = ExperimentOutput([], cols)
    n = insts[0].p + 1
    radius = 2.0 ** -(2 * n - 1)
    for i, inst in enumerate(insts):
        t0 = time.perf_counter()
        try:
            got = sharpp.solve_counting(inst, oracle, cfg.mu)
            status = "ok" if got == inst.count else "wrong"
        except Ambiguous:
            got, status = None, "ambiguous"
        err = oracle.last_error
        within = abs(err) < radius
        ok = status == "ok" if within else True
        out.records.append(_record(
            cfg, i, {"p": inst.p, "table": sharpp.format_table(inst).strip(), "noise": cfg.noise,
                     "epsilon": cfg.epsilon, "mu": cfg.mu},
            {"count": inst.count, "decoded": got, "injected_error": err, "status": status},
            {"decoding_radius": radius}, ok, t0))
        out.rows.append([i, inst.p, inst.count, got, err, radius, status, ok])
    return out


# -- concentration --------------------------------------------------------------

def markov_floor(delta: float, c_tvd: float, m: int, Delta: float) -> float:
    """1/2 + (3/2) delta / (1 - delta) - c_tvd m Delta."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if c_tvd < 0:
        raise ValueError("c_tvd must be >= 0")
    return 0.5 + 1.5 * delta / (1 - delta) - c_tvd * m * Delta


def good_point_tail(delta: float, L: int) -> float:
    """Pr[Bin(L, 3/4 + delta) >= ceil((1 + delta) L / 2)], summed exactly."""
    k = ceil_frac((1 + delta) * L / 2)
    return float(binom.sf(k - 1, L, 0.75 + delta))


def concentration_experiment(cfg: ExperimentConfig) -> ExperimentOutput:
    deltas = cfg.deltas or [0.05, 0.1, 0.2, 0.24]
    Ls = cfg.Ls or [11, 41, 101]
    trials = cfg.trials_or(10_000)
    cols = ["delta", "L", "threshold", "exact_tail", "monte_carlo", "sigma", "floor", "passed"]
    out = ExperimentOutput([], cols)
    for i, (delta, L) in enumerate((dl, L) for dl in deltas for L in Ls):
        t0 = time.perf_counter()
        delta, L = float(delta), int(L)
        if not 0 < delta <= 0.25:
            raise ConfigError("concentration needs delta in (0, 1/4]")
        k = ceil_frac((1 + delta) * L / 2)
        tail = good_point_tail(delta, L)
        hits = trial_rng(cfg.seed, i).binomial(L, 0.75 + delta, size=trials) >= k
        mc = float(hits.mean())
        sigma = math.sqrt(max(tail * (1 - tail), 1.0 / trials) / trials)
        floor = markov_floor(delta, cfg.c_tvd, cfg.m, cfg.Delta_or_default)
        ok = tail >= floor and abs(mc - tail) <= 3 * sigma
        out.records.append(_record(
            cfg, i, {"delta": delta, "L": L, "trials": trials, "c_tvd": cfg.c_tvd},
            {"threshold": k, "exact_tail": tail, "monte_carlo": mc, "sigma": sigma},
            {"markov_floor": floor}, ok, t0))
        out.rows.append([delta, L, k, tail, mc, sigma, floor, ok])
    return out


# -- tvd-proxy ------------------------------------------------------------------

def _cayley_p0(base, phases, vecs, x):
    """p0 of the one-gate family base * f((1-x) h) for a batch of eigensystems."""
    h = np.tan(phases / 2)
    theta = 1.0 - x
    lam = (1 + 1j * theta * h) / (1 - 1j * theta * h)
    # <00| base V diag(lam) V^dagger |00>
    left = base[0] @ vecs  # (B, 4): row 0 of base times V
    right = np.conj(vecs[:, 0, :])  # (B, 4): column 0 of V^dagger
    amp = np.sum(left * lam * right, axis=1)
    return np.abs(amp) ** 2


def _hist_distance(a, b, edges):
    ha = np.histogram(a, edges)[0] / len(a)
    hb = np.histogram(b, edges)[0] / len(b)
    return 0.5 * float(np.abs(ha - hb).sum())


def tvd_proxy_experiment(cfg: ExperimentConfig) -> ExperimentOutput:
    """Histogram distance between p0 under Haar gates and Cayley-perturbed gates.

    One two-qubit gate whose fixed (worst-case) value is the identity; both
    distributions are sampled from the same Haar draws (x = 0 versus
    x = Delta on the same path), which removes the sampling noise floor an
    uncoupled comparison would have.  Bootstrap resamples are shared across
    Delta values, so differences get paired error bars.

    Passing means: the Delta = 0 distance is within 3 sigma of zero, every
    step of the sweep increases the distance, and the largest Delta exceeds
    the smallest by more than 3 paired sigma.
    """
    deltas = [0.0] + [float(v) for v in (cfg.deltas or [0.5 / 27, 0.5 / 9, 0.5 / 3, 0.5])]
    rng = trial_rng(cfg.seed, 0)
    base = np.eye(4, dtype=complex)
    haar = haar_unitary_batch(4, cfg.samples, rng)
    phases, vecs = eig_unitary_batch(haar)
    edges = np.linspace(0.0, 1.0, cfg.bins + 1)
    ref = _cayley_p0(base, phases, vecs, 0.0)
    boot = [rng.integers(0, cfg.samples, size=cfg.samples) for _ in range(cfg.bootstrap)]
    dist, reps = [], []
    for Delta in deltas:
        pert = _cayley_p0(base, phases, vecs, Delta)
        dist.append(_hist_distance(ref, pert, edges))
        reps.append(np.array([_hist_distance(ref[b], pert[b], edges) for b in boot]))
    sig = [float(np.std(r)) for r in reps]
    xs = np.array(deltas[1:])
    c_fit = float(xs @ np.array(dist[1:]) / (xs @ xs))
    cols = ["Delta", "distance", "sigma", "step", "step_sigma", "ratio_to_previous", "fitted_c",
            "passed"]
    out = ExperimentOutput([], cols)
    for k, Delta in enumerate(deltas):
        t0 = time.perf_counter()
        if k == 0:
            step = step_sig = ratio = None
            ok = dist[0] <= 3 * sig[0]
        else:
            step = dist[k] - dist[k - 1]
            step_sig = float(np.std(reps[k] - reps[k - 1]))
            ratio = dist[k] / dist[k - 1] if dist[k - 1] > 0 else None
            ok = step > 0
            if k == len(deltas) - 1 and k >= 2:
                span_sig = float(np.std(reps[k] - reps[1]))
                ok = ok and dist[k] - dist[1] > 3 * span_sig
        out.records.append(_record(
            cfg, k, {"Delta": Delta, "samples": cfg.samples, "bins": cfg.bins,
                     "bootstrap": cfg.bootstrap},
            {"distance": dist[k], "sigma": sig[k], "step": step, "step_sigma": step_sig,
             "ratio_to_previous": ratio},
            {"fitted_c": c_fit, "c_Delta": c_fit * Delta}, ok, t0))
        out.rows.append([Delta, dist[k], sig[k], step, step_sig, ratio, c_fit, ok])
    return out


RUNNERS = {
    "bounds-sweep": bounds_sweep,
    "strong-reduction": strong_reduction,
    "weak-reduction": weak_reduction,
    "chebyshev-saturation": chebyshev_saturation,
    "sharp-p": sharp_p,
    "concentration": concentration_experiment,
    "tvd-proxy": tvd_proxy_experiment,
    "degree-check": degree_check,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentOutput:
    """Validate and dispatch; input-shape problems surface as ConfigError."""
    cfg.validate()
    try:
        return RUNNERS[cfg.experiment](cfg)
    except (BadShape, TooManyQubits, TooManyWitnessBits) as exc:
        raise ConfigError(str(exc)) from exc
