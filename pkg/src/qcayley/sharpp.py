"""Counting problems encoded in circuit amplitudes.

For a truth table M over p witness bits with f ones, the circuit
H^p V H^p with V = diag((-1)^M(y)) has <0|C|0> = 1 - f / 2^(p-1).  Replacing
f by g = f + 2^p (table G(y, z) = z or M(y)) fixes the sign of that
amplitude, so the count decodes uniquely from the output probability.

V is synthesized exactly from two-qubit gates: its phase pi * M(y) is
expanded over parities chi_S(y) (a Walsh-Hadamard transform), and each term
exp(i pi c_S chi_S) is a CNOT ladder onto the last two qubits of S, a
diagonal two-qubit gate, and the ladder undone.  The S = {} term is a global
phase, emitted as a scalar gate because the amplitude's sign matters.
"""
import math
from dataclasses import dataclass

import numpy as np

from .circuits import Architecture, Circuit
from .errors import Ambiguous, ParseError, TooManyWitnessBits
from .reduction import query

MAX_TABLE_BITS = 16
MAX_BUILD_BITS = 12
MAX_AUGMENT_BITS = 11

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_I2 = np.eye(2, dtype=complex)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_Z = np.array([1.0, -1.0])


@dataclass(frozen=True)
class CountingInstance:
    """Truth table of M(x, .) for a fixed input x; index y is big-endian."""

    p: int
    table: tuple

    def __post_init__(self):
        table = tuple(bool(v) for v in self.table)
        object.__setattr__(self, "table", table)
        if not 0 <= self.p <= MAX_TABLE_BITS:
            raise TooManyWitnessBits(f"p must lie in [0, {MAX_TABLE_BITS}], got {self.p}")
        if len(table) != 2 ** self.p:
            raise ValueError(f"table has {len(table)} entries, expected {2 ** self.p}")

    @property
    def count(self) -> int:
        return sum(self.table)

    @classmethod
    def from_int(cls, p: int, bits: int) -> "CountingInstance":
        """Table whose entry y is bit y of ``bits`` (handy for enumeration)."""
        return cls(p, [(bits >> y) & 1 for y in range(2 ** p)])


def parse_table(text: str) -> CountingInstance:
    """Parse one line of 2^p characters in {0, 1}."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) != 1:
        raise ParseError(f"expected exactly one non-empty line, found {len(lines)}")
    line = lines[0]
    for col, ch in enumerate(line, start=1):
        if ch not in "01":
            raise ParseError(f"line 1, column {col}: unexpected character {ch!r}")
    p = len(line).bit_length() - 1
    if 2 ** p != len(line):
        raise ParseError(f"line 1: length {len(line)} is not a power of two")
    if p > MAX_TABLE_BITS:
        raise ParseError(f"line 1: table needs p <= {MAX_TABLE_BITS}")
    return CountingInstance(p, [ch == "1" for ch in line])


def format_table(inst: CountingInstance) -> str:
    return "".join("1" if v else "0" for v in inst.table) + "\n"


def walsh_coefficients(table) -> np.ndarray:
    """c_S with t(y) = sum_S c_S chi_S(y); S is a bitmask in the same order as y."""
    a = np.asarray(table, dtype=float).copy()
    h = 1
    while h < len(a):
        a = a.reshape(-1, 2, h)
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1).reshape(-1)
        h *= 2
    return a / len(a)


def _partner(q: int, n: int) -> int:
    return q + 1 if q + 1 < n else q - 1


def _diag_term(theta: float) -> np.ndarray:
    """exp(i theta Z x Z) as a 4 x 4 diagonal."""
    return np.diag(np.exp(1j * theta * np.kron(_Z, _Z)))


def _single_term(theta: float) -> np.ndarray:
    """exp(i theta Z) on the high qubit of a pair."""
    return np.diag(np.exp(1j * theta * np.kron(_Z, [1.0, 1.0])))


def _phase_gates(table, p: int, n: int):
    """Two-qubit (slot, gate) list realizing diag((-1)^table) on qubits 0..p-1."""
    coeffs = walsh_coefficients(table)
    out = []
    if coeffs[0] != 0:
        out.append(((0, 1), np.exp(1j * math.pi * coeffs[0]) * np.eye(4, dtype=complex)))
    for mask in range(1, 2 ** p):
        c = coeffs[mask]
        if c == 0:
            continue
        # bit (p-1-q) of the mask selects qubit q, matching big-endian y
        qs = [q for q in range(p) if (mask >> (p - 1 - q)) & 1]
        theta = math.pi * c
        if len(qs) == 1:
            q = qs[0]
            out.append(((q, _partner(q, n)), _single_term(theta)))
            continue
        last, prev = qs[-1], qs[-2]
        ladder = [((q, last), _CNOT) for q in qs[:-2]]
        out.extend(ladder)
        out.append(((prev, last), _diag_term(theta)))
        out.extend(reversed(ladder))
    return out


def _hadamard_layer(p: int, n: int):
    hh = np.kron(_H, _I2)
    return [((q, _partner(q, n)), hh) for q in range(p)]


def build_fenner_circuit(inst: CountingInstance) -> Circuit:
    """H^p V H^p as a two-qubit circuit; <0|C|0> = 1 - f / 2^(p-1).

    p = 1 gets an idle second qubit so that two-qubit slots exist.
    """
    p = inst.p
    if p > MAX_BUILD_BITS:
        raise TooManyWitnessBits(f"circuit construction needs p <= {MAX_BUILD_BITS}, got {p}")
    if p < 1:
        raise ValueError("circuit construction needs p >= 1")
    n = max(p, 2)
    items = _hadamard_layer(p, n) + _phase_gates(inst.table, p, n) + _hadamard_layer(p, n)
    slots, gates = zip(*items)
    return Circuit(Architecture(n, slots), gates, check=False)


def g_augment(inst: CountingInstance) -> CountingInstance:
    """G(y, z) = z or M(y) over p + 1 bits (z least significant); count f + 2^p."""
    if inst.p > MAX_AUGMENT_BITS:
        raise TooManyWitnessBits(f"g-augmentation needs p <= {MAX_AUGMENT_BITS}, got {inst.p}")
    table = []
    for v in inst.table:
        table.extend((v, True))
    return CountingInstance(inst.p + 1, table)


def pad_identity(c: Circuit, k: int) -> Circuit:
    """Append k identity gates on qubits (0, 1)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return c
    eye = np.eye(4, dtype=complex)
    arch = Architecture(c.n, c.arch.slots + ((0, 1),) * k)
    return Circuit(arch, c.gates + (eye,) * k, prec=c.prec, check=False)


def padding_size(n: int, mu: float) -> int:
    """k = ceil((2n)^(1/mu))."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return math.ceil(round((2 * n) ** (1 / mu), 9))


def forward_probability(g: int, n: int) -> float:
    return (1 - g / 2 ** (n - 1)) ** 2


def decode_count(prob: float, n: int) -> int:
    """The unique g in [2^(n-1), 2^n] with |(1 - g/2^(n-1))^2 - prob| < 2^-(2n-1)."""
    radius = 2.0 ** -(2 * n - 1)
    half = 2 ** (n - 1)
    hits = [g for g in range(half, 2 * half + 1)
            if abs(forward_probability(g, n) - float(prob)) < radius]
    if len(hits) != 1:
        raise Ambiguous(f"{len(hits)} counts within {radius:g} of probability {float(prob)!r}")
    return hits[0]


def solve_counting(inst: CountingInstance, o, mu: float = 1.0) -> int:
    """Recover f = popcount(table) from one noisy probability query."""
    aug = g_augment(inst)
    c = pad_identity(build_fenner_circuit(aug), padding_size(aug.p, mu))
    return decode_count(query(o, c), aug.p) - 2 ** inst.p
