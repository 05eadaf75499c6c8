"""Statevector evaluation of <0^n|C|0^n> and the x-dependent probabilities.

Qubit 0 is the most significant bit of a basis index.  A two-qubit gate on
slot (q1, q2) uses q1 as the high bit of its 4-dimensional index.
"""
from functools import lru_cache

import mpmath
import numpy as np

from .cayley import q_factor_sq
from .circuits import Circuit, ParamCircuit, at_x
from .constants import MAX_QUBITS
from .errors import TooManyQubits


@lru_cache(maxsize=None)
def _index_groups(n: int, q1: int, q2: int) -> np.ndarray:
    rest = np.arange(2 ** n)
    b1, b2 = 1 << (n - 1 - q1), 1 << (n - 1 - q2)
    rest = rest[(rest & b1 == 0) & (rest & b2 == 0)]
    return np.stack([rest, rest | b2, rest | b1, rest | b1 | b2])


class Statevector:
    """Mutable 2^n amplitude array; one instance per worker."""

    def __init__(self, n: int, prec: int | None = None):
        if n > MAX_QUBITS:
            raise TooManyQubits(f"{n} qubits exceeds the {MAX_QUBITS}-qubit guard")
        self.n = n
        self.prec = prec
        if prec is None:
            self.amps = np.zeros(2 ** n, dtype=complex)
            self.amps[0] = 1.0
        else:
            self.amps = np.full(2 ** n, mpmath.mpc(0), dtype=object)
            self.amps[0] = mpmath.mpc(1)

    def apply(self, gate, q1: int, q2: int) -> None:
        idx = _index_groups(self.n, q1, q2)
        self.amps[idx] = gate @ self.amps[idx]

    def norm(self) -> float:
        if self.prec is None:
            return float(np.linalg.norm(self.amps))
        return float(mpmath.sqrt(mpmath.fsum(abs(a) ** 2 for a in self.amps)))


def run(c: Circuit) -> Statevector:
    sv = Statevector(c.n, c.prec)
    if c.prec is None:
        for g, (q1, q2) in zip(c.gates, c.arch.slots):
            sv.apply(g, q1, q2)
    else:
        with mpmath.workprec(c.prec):
            for g, (q1, q2) in zip(c.gates, c.arch.slots):
                sv.apply(g, q1, q2)
    return sv


def amplitude_zero(c: Circuit):
    """<0^n|C|0^n> (complex, or mpmath.mpc for high-precision circuits)."""
    return run(c).amps[0]


def _abs2(z, prec):
    if prec is None:
        return float(z.real * z.real + z.imag * z.imag)
    with mpmath.workprec(prec):
        return z.real * z.real + z.imag * z.imag


def probability_zero(c: Circuit):
    return _abs2(amplitude_zero(c), c.prec)


def p0(pc: ParamCircuit, x, prec: int | None = None):
    """|<0^n|C(x)|0^n>|^2 for the interpolated circuit."""
    return probability_zero(at_x(pc, x, prec))


def q_squared(pc: ParamCircuit, x, prec: int | None = None):
    """|Q(x)|^2 = product of the per-gate factors; equals 1 at x = 0."""
    if prec is None:
        return float(np.prod([q_factor_sq(p, x) for p in pc.paths]))
    with mpmath.workprec(prec):
        out = mpmath.mpf(1)
        for p in pc.paths:
            out *= q_factor_sq(p, x, prec)
        return out


def p_e(pc: ParamCircuit, x, prec: int | None = None):
    """The degree-8m polynomial |Q(x)|^2 p0(x)."""
    if prec is None:
        return q_squared(pc, x) * p0(pc, x)
    with mpmath.workprec(prec):
        return q_squared(pc, x, prec) * p0(pc, x, prec)

