import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from qcayley.errors import TooLarge
from qcayley.polyextrap import SampleSet, nodes_grid
from qcayley.woracle import (ExactW, RansacW, WInstance, ceil_frac, intersection_size_check,
                             make_w_instance, w_oracle_exact, w_oracle_ransac)


def scipy_w(w: WInstance) -> bool:
    """Independent oracle: every threshold-subset as a monomial-basis LP via HiGHS."""
    x = np.asarray(w.samples.xs)
    y = np.asarray(w.samples.ys)
    tol = np.asarray(w.tol)
    v = np.vander(x, w.d + 1, increasing=True)
    one = np.ones(w.d + 1)
    for s in itertools.combinations(range(w.L), w.threshold):
        s = list(s)
        a = np.vstack([v[s], -v[s], -one, one])
        b = np.concatenate([y[s] + tol[s], tol[s] - y[s], [-w.l], [w.upper]])
        res = linprog(np.zeros(w.d + 1), A_ub=a, b_ub=b, bounds=[(None, None)] * (w.d + 1),
                      method="highs")
        if res.status == 0:
            return True
    return False


def poly_instance(rng, d, L, Delta=0.5, eps=1e-3, corrupt=0, delta=0.5, noise=True):
    coef = rng.uniform(-0.3, 0.3, d + 1)
    coef[0] = rng.uniform(0.5, 1.0)
    xs = nodes_grid(L, Delta)
    ys = np.polynomial.polynomial.polyval(xs, coef)
    if noise:
        ys = ys + rng.uniform(-eps, eps, L)
    if corrupt:
        bad = rng.choice(L, corrupt, replace=False)
        ys[bad] += rng.choice([-1, 1], corrupt) * rng.uniform(0.1, 0.5, corrupt)
    w = make_w_instance(d, SampleSet(xs, [float(t) for t in ys]), [1.0] * L, eps, delta)
    return w, float(np.polynomial.polynomial.polyval(1.0, coef))


def test_ceil_frac():
    assert ceil_frac((1 + 0.2) * 10 / 2) == 6
    assert ceil_frac(6.5) == 7


def test_instance_validation():
    s = SampleSet([0.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        WInstance(1, s, [0, 0], 2, 1.0, 1.0)
    with pytest.raises(ValueError):
        WInstance(1, s, [0], 2, 0.0, 1.0)
    with pytest.raises(ValueError):
        WInstance(1, s, [0, -1], 2, 0.0, 1.0)


def test_threshold_formula():
    w, _ = poly_instance(np.random.default_rng(0), 2, 10, delta=0.5)
    assert w.threshold == 8
    w, _ = poly_instance(np.random.default_rng(0), 2, 10, delta=0.2)
    assert w.threshold == 6


def test_exact_true_on_clean_polynomial():
    rng = np.random.default_rng(1)
    for _ in range(20):
        w, truth = poly_instance(rng, 2, 6, noise=False)
        res = w_oracle_exact(w)
        assert res.ok
        assert len(w.inliers(res.coeffs)) >= w.threshold
        assert w.l <= np.polynomial.polynomial.polyval(1.0, res.coeffs) <= w.r


def test_exact_false_when_interval_excludes_value():
    rng = np.random.default_rng(2)
    for _ in range(20):
        w, truth = poly_instance(rng, 2, 6)
        # the widest reachable value at 1 is well within 0.2 of the truth here
        assert scipy_w(w.with_interval(truth + 0.2, 2.0)) is False
        assert not w_oracle_exact(w.with_interval(truth + 0.2, 2.0))
        assert not w_oracle_exact(w.with_interval(0.0, truth - 0.2))
        assert w_oracle_exact(w.with_interval(truth - 0.01, truth + 0.01))


def test_zero_data_excludes_one():
    xs = nodes_grid(4, 0.5)
    w = WInstance(1, SampleSet(xs, [0.0] * 4), [0.0] * 4, 3, 1.0, 2.0)
    assert not w_oracle_exact(w)
    assert not w_oracle_ransac(w, 200, np.random.default_rng(0))
    assert w_oracle_exact(w.with_interval(0.0, 1.0))


def test_exact_guard():
    w, _ = poly_instance(np.random.default_rng(3), 2, 26)
    with pytest.raises(TooLarge):
        w_oracle_exact(w)
    # threshold below d + 1
    xs = nodes_grid(4, 0.5)
    with pytest.raises(TooLarge):
        w_oracle_exact(WInstance(3, SampleSet(xs, [0.0] * 4), [1.0] * 4, 3, 0.0, 2.0))


@pytest.mark.parametrize("seed", range(30))
def test_exact_matches_scipy_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    d = int(rng.integers(1, 3))
    L = int(rng.integers(d + 3, 8))
    w, truth = poly_instance(rng, d, L, corrupt=int(rng.integers(0, 2)), delta=0.4)
    for l in np.linspace(0, 1.9, 6):
        sub = w.with_interval(float(l), float(l) + 0.1)
        assert bool(w_oracle_exact(sub)) == scipy_w(sub)


def test_ransac_clean_data_high_success():
    hits = 0
    for seed in range(300):
        rng = np.random.default_rng(seed)
        w, truth = poly_instance(rng, 2, 8)
        hits += bool(w_oracle_ransac(w, 200, rng))
    assert hits / 300 >= 0.999


def test_ransac_zero_tolerance_excluded_interval_false():
    rng = np.random.default_rng(4)
    for _ in range(50):
        w, truth = poly_instance(rng, 2, 8, noise=False)
        w0 = WInstance(w.d, w.samples, [0.0] * w.L, w.threshold, truth + 0.05, 2.0)
        assert not w_oracle_ransac(w0, 200, rng)


def test_ransac_agrees_with_exact_when_corrupted():
    rng = np.random.default_rng(5)
    exact = ExactW()
    agree = 0
    for _ in range(40):
        L = int(rng.integers(8, 13))
        w, truth = poly_instance(rng, 2, L, corrupt=int(0.4 * L) - 1, delta=0.2)
        for l, r in [(0.0, 2.0), (truth - 0.05, truth + 0.05), (truth + 0.3, 2.0)]:
            sub = w.with_interval(l, r)
            e = bool(exact(sub))
            ra = bool(w_oracle_ransac(sub, 200, rng))
            assert not (ra and not e)  # one-sided: never a false "true"
            agree += e == ra
    assert agree == 120


def test_ransac_certificate_verifies():
    rng = np.random.default_rng(6)
    w, _ = poly_instance(rng, 3, 12, corrupt=2)
    res = RansacW(200, rng)(w)
    assert res.ok
    assert len(w.inliers(res.coeffs)) >= w.threshold
    assert 0.0 <= np.polynomial.polynomial.polyval(1.0, res.coeffs) < 2.0


def test_monotonicity_random():
    rng = np.random.default_rng(7)
    exact = ExactW()
    for _ in range(100):
        w, truth = poly_instance(rng, 1, 6, corrupt=int(rng.integers(0, 2)), delta=0.3)
        l = float(rng.uniform(0, 1.8))
        r = l + float(rng.uniform(0.01, 0.2))
        if exact(w.with_interval(l, r)):
            l2 = max(0.0, l - float(rng.uniform(0, 0.3)))
            r2 = r + float(rng.uniform(0, 0.3))
            assert exact(w.with_interval(l2, r2))


def test_intersection_examples():
    L = 10
    assert intersection_size_check(range(L), range(L), L, 0.5, 4)
    assert not intersection_size_check(range(5), range(5, 10), L, 0.05, 0)
    with pytest.raises(ValueError):
        intersection_size_check([0, 11], [0], L, 0.5, 1)


def test_intersection_random_sets():
    rng = np.random.default_rng(8)
    for _ in range(10_000):
        L = int(rng.integers(2, 40))
        delta = float(rng.uniform(0.01, 0.99))
        k = ceil_frac((1 + delta) * L / 2)
        a = rng.choice(L, k, replace=False)
        b = rng.choice(L, k, replace=False)
        assert len(set(a) & set(b)) >= math.floor(delta * L)
        d = math.floor(delta * L) - 1
        if d >= 0:
            assert intersection_size_check(a, b, L, delta, d)
