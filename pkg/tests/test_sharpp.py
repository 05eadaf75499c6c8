import itertools

import numpy as np
import pytest

from qcayley.errors import Ambiguous, ParseError, TooManyWitnessBits
from qcayley.reduction import Exact, NoisyOracle, Uniform
from qcayley.sharpp import (CountingInstance, build_fenner_circuit, decode_count, format_table,
                            forward_probability, g_augment, pad_identity, padding_size, parse_table,
                            solve_counting, walsh_coefficients)
from qcayley.simulator import amplitude_zero, probability_zero


def amplitude_oracle(table):
    """<0|H V H|0> = mean of (-1)^t(y) over all y."""
    return float(np.mean([(-1) ** int(v) for v in table]))


def test_instance_validation():
    assert CountingInstance(2, [0, 1, 1, 0]).count == 2
    with pytest.raises(ValueError):
        CountingInstance(2, [0, 1])
    with pytest.raises(TooManyWitnessBits):
        CountingInstance(17, [])
    assert CountingInstance.from_int(2, 0b0110).table == (False, True, True, False)


def test_parse_and_format():
    inst = parse_table("0110\n")
    assert inst.p == 2 and inst.count == 2
    assert format_table(inst) == "0110\n"
    with pytest.raises(ParseError, match="column 3"):
        parse_table("01x0")
    with pytest.raises(ParseError, match="power of two"):
        parse_table("011")
    with pytest.raises(ParseError):
        parse_table("01\n10")


def test_walsh_reconstruction():
    rng = np.random.default_rng(0)
    for p in range(1, 7):
        t = rng.integers(0, 2, 2 ** p)
        c = walsh_coefficients(t)
        ys = np.arange(2 ** p)
        recon = [sum(c[s] * (-1) ** bin(s & y).count("1") for s in range(2 ** p)) for y in ys]
        assert np.allclose(recon, t, atol=1e-12)


def test_fenner_examples():
    c = build_fenner_circuit(CountingInstance(2, [0, 0, 0, 0]))
    assert amplitude_zero(c) == pytest.approx(1, abs=1e-12)
    assert probability_zero(c) == pytest.approx(1, abs=1e-12)
    c = build_fenner_circuit(CountingInstance(2, [1, 1, 1, 0]))
    assert amplitude_zero(c) == pytest.approx(-0.5, abs=1e-12)
    assert probability_zero(c) == pytest.approx(0.25, abs=1e-12)


def test_fenner_p3_random():
    rng = np.random.default_rng(1)
    for _ in range(50):
        inst = CountingInstance(3, rng.integers(0, 2, 8))
        assert probability_zero(build_fenner_circuit(inst)) == pytest.approx(
            (1 - inst.count / 4) ** 2, abs=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_amplitude_identity_exhaustive(p):
    for table in itertools.product([0, 1], repeat=2 ** p):
        amp = amplitude_zero(build_fenner_circuit(CountingInstance(p, table)))
        assert abs(amp.real - (1 - sum(table) / 2 ** (p - 1))) <= 1e-12
        assert abs(amp.imag) <= 1e-12
        assert amp.real == pytest.approx(amplitude_oracle(table), abs=1e-12)


@pytest.mark.parametrize("p", [4, 5, 6])
def test_amplitude_identity_random(p):
    rng = np.random.default_rng(p)
    for _ in range(40):
        table = rng.integers(0, 2, 2 ** p)
        amp = amplitude_zero(build_fenner_circuit(CountingInstance(p, table)))
        assert abs(amp.real - (1 - table.sum() / 2 ** (p - 1))) <= 1e-12
        assert abs(amp.imag) <= 1e-12


def test_build_limits():
    with pytest.raises(TooManyWitnessBits):
        build_fenner_circuit(CountingInstance(13, [0] * 2 ** 13))
    with pytest.raises(ValueError):
        build_fenner_circuit(CountingInstance(0, [1]))


def test_g_augment():
    aug = g_augment(CountingInstance(2, [0, 1, 0, 0]))
    assert aug.p == 3 and aug.count == 5
    assert g_augment(CountingInstance(3, [0] * 8)).count == 8
    assert g_augment(CountingInstance(0, [1])).count == 2


def test_padding():
    c = build_fenner_circuit(CountingInstance(3, [1, 0, 1, 1, 0, 0, 0, 1]))
    assert pad_identity(c, 0) is c
    assert padding_size(3, 1.0) == 6
    padded = pad_identity(c, 6)
    assert padded.m == c.m + 6
    for k in (1, 7, 64):
        assert probability_zero(pad_identity(c, k)) == pytest.approx(probability_zero(c), abs=1e-12)
    with pytest.raises(ValueError):
        pad_identity(c, -1)


def test_decode_examples():
    assert decode_count(1 / 16, 3) == 5
    assert decode_count(0.0, 3) == 4
    assert decode_count(1.0, 3) == 8
    with pytest.raises(Ambiguous):
        decode_count(0.5, 3)


@pytest.mark.parametrize("n", range(1, 13))
def test_g_trick_injective(n):
    half = 2 ** (n - 1)
    probs = [forward_probability(g, n) for g in range(half, 2 * half + 1)]
    assert all(1 - g / half <= 0 for g in range(half, 2 * half + 1))
    assert all(a < b for a, b in zip(probs, probs[1:]))
    for g, pr in zip(range(half, 2 * half + 1), probs):
        assert decode_count(pr, n) == g


def test_solve_counting_p3_all_tables():
    o = NoisyOracle(Exact())
    for bits in range(256):
        inst = CountingInstance.from_int(3, bits)
        assert solve_counting(inst, o) == inst.count


def test_solve_counting_random_up_to_8():
    rng = np.random.default_rng(2)
    o = NoisyOracle(Exact())
    for _ in range(1000):
        p = int(rng.integers(0, 9))
        inst = CountingInstance(p, rng.integers(0, 2, 2 ** p))
        assert solve_counting(inst, o) == inst.count


def test_solve_counting_small_noise():
    rng = np.random.default_rng(3)
    n = 3
    o = NoisyOracle(Uniform(2.0 ** (-2 * n)), np.random.default_rng(4))
    for _ in range(1000):
        inst = CountingInstance(2, rng.integers(0, 2, 4))
        assert solve_counting(inst, o) == inst.count


def test_large_noise_is_reported_not_misdecoded():
    rng = np.random.default_rng(5)
    n = 3
    radius = 2.0 ** -(2 * n - 1)
    o = NoisyOracle(Uniform(0.5), np.random.default_rng(6))
    reported = 0
    for _ in range(1000):
        inst = CountingInstance(2, rng.integers(0, 2, 4))
        try:
            f = solve_counting(inst, o)
        except Ambiguous:
            reported += 1
            continue
        if f != inst.count:
            # a wrong answer only ever comes from an error beyond the decoding radius
            assert abs(o.last_error) >= radius
    assert reported > 0
