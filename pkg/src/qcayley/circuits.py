"""Architectures, Haar-random circuits and Cayley-perturbed circuit families."""
import json
import math
from dataclasses import dataclass

import numpy as np

from .cayley import GatePath, gate_at, make_gate_path, phase_align
from .constants import TOL
from .errors import BadShape, EigenvalueNearMinusOne, ParseError
from .linalg import max_abs

GATE_DIM = 4


@dataclass(frozen=True)
class Architecture:
    """Qubit count and ordered two-qubit slots; slot order is application order."""

    n: int
    slots: tuple

    def __post_init__(self):
        slots = tuple((int(a), int(b)) for a, b in self.slots)
        object.__setattr__(self, "slots", slots)
        if self.n < 2:
            raise BadShape("architectures need at least two qubits")
        if not slots:
            raise BadShape("architecture has no gate slots")
        for a, b in slots:
            if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                raise BadShape(f"invalid slot {(a, b)} for n={self.n}")

    @property
    def m(self) -> int:
        return len(self.slots)


@dataclass(frozen=True, eq=False)
class Circuit:
    arch: Architecture
    gates: tuple
    prec: int | None = None
    check: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if len(self.gates) != self.arch.m:
            raise BadShape(f"{len(self.gates)} gates for {self.arch.m} slots")
        if self.check:
            for k, g in enumerate(self.gates):
                g = np.asarray(g, dtype=complex)
                if g.shape != (GATE_DIM, GATE_DIM):
                    raise BadShape(f"gate {k} has shape {g.shape}")
                if max_abs(g.conj().T @ g - np.eye(GATE_DIM)) > TOL.unitary:
                    raise ValueError(f"gate {k} is not unitary")

    @property
    def n(self) -> int:
        return self.arch.n

    @property
    def m(self) -> int:
        return self.arch.m


@dataclass(frozen=True, eq=False)
class ParamCircuit:
    """The family C(x): worst-case gates at x = 1, Haar-rotated gates at x = 0."""

    arch: Architecture
    paths: tuple

    @property
    def m(self) -> int:
        return self.arch.m

    @property
    def n(self) -> int:
        return self.arch.n

    @property
    def degree(self) -> int:
        return 2 * GATE_DIM * self.m


def haar_unitary_batch(dim: int, count: int, rng) -> np.ndarray:
    """``count`` Haar-random dim x dim unitaries (QR of Ginibre + phase fix)."""
    z = (rng.standard_normal((count, dim, dim))
         + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def haar_unitary(dim: int, rng) -> np.ndarray:
    if dim not in (2, 4):
        raise BadShape(f"Haar sampling supports dim 2 or 4, got {dim}")
    return haar_unitary_batch(dim, 1, rng)[0]


def sample_circuit(arch: Architecture, rng) -> Circuit:
    gates = haar_unitary_batch(GATE_DIM, arch.m, rng)
    return Circuit(arch, tuple(gates), check=False)


def _path_with_retry(base, target, qubits, align) -> GatePath:
    if align:
        _, target = phase_align(base, target)
    try:
        return make_gate_path(base, target, qubits)
    except EigenvalueNearMinusOne:
        # a global phase on the target leaves every probability unchanged
        _, aligned = phase_align(base, target)
        return make_gate_path(base, aligned, qubits)


def make_param_circuit(worst: Circuit, rng, align: bool = False) -> ParamCircuit:
    """Interpolate each worst-case gate C_k to C_k H_k with a fresh Haar H_k.

    With ``align`` every target gets the global phase chosen by
    ``phase_align``, which bounds ||h|| by tan(3pi/8) and keeps |Q(1)|^2 away
    from zero.  Probabilities are unaffected, but the x = 0 gates are then
    Haar only up to a global phase.
    """
    haar = haar_unitary_batch(GATE_DIM, worst.m, rng)
    paths = tuple(
        _path_with_retry(np.asarray(c, dtype=complex), np.asarray(c, dtype=complex) @ h, slot,
                         align)
        for c, h, slot in zip(worst.gates, haar, worst.arch.slots))
    return ParamCircuit(worst.arch, paths)


def at_x(pc: ParamCircuit, x, prec: int | None = None) -> Circuit:
    return Circuit(pc.arch, tuple(gate_at(p, x, prec) for p in pc.paths),
                   prec=prec, check=False)


def preset_arch(kind: str, n: int, depth: int) -> Architecture:
    """Nearest-neighbour layouts.

    ``line-brickwork`` alternates even pairs (0,1),(2,3),... with odd pairs
    (1,2),(3,4),...  ``grid`` puts n qubits on a sqrt(n) x sqrt(n) lattice in
    row-major order; each layer lists every horizontal edge, then every
    vertical edge.
    """
    if depth < 1:
        raise BadShape("depth must be >= 1")
    slots = []
    if kind == "line-brickwork":
        for layer in range(depth):
            slots.extend((q, q + 1) for q in range(layer % 2, n - 1, 2))
    elif kind == "grid":
        side = math.isqrt(n)
        if side * side != n or side < 2:
            raise BadShape(f"grid needs a square qubit count >= 4, got {n}")
        horizontal = [(r * side + c, r * side + c + 1) for r in range(side) for c in range(side - 1)]
        vertical = [(r * side + c, (r + 1) * side + c) for r in range(side - 1) for c in range(side)]
        for _ in range(depth):
            slots.extend(horizontal + vertical)
    else:
        raise BadShape(f"unknown architecture kind {kind!r}")
    return Architecture(n, tuple(slots))


def circuit_to_json(c: Circuit) -> str:
    gates = []
    for g in c.gates:
        g = np.asarray(g, dtype=complex).reshape(-1)
        gates.append([[float(z.real), float(z.imag)] for z in g])
    doc = {"n": c.arch.n, "slots": [list(s) for s in c.arch.slots], "gates": gates}
    return json.dumps(doc)


def circuit_from_json(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for key in ("n", "slots", "gates"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    if not isinstance(doc["n"], int):
        raise ParseError("field 'n' must be an integer")
    try:
        arch = Architecture(doc["n"], tuple(tuple(s) for s in doc["slots"]))
    except (BadShape, TypeError, ValueError) as exc:
        raise ParseError(f"field 'slots': {exc}") from exc
    gates = []
    for k, entries in enumerate(doc["gates"]):
        if not isinstance(entries, list) or len(entries) != GATE_DIM * GATE_DIM:
            raise ParseError(f"field 'gates[{k}]': expected {GATE_DIM * GATE_DIM} entries")
        try:
            vals = [complex(float(re), float(im)) for re, im in entries]
        except (TypeError, ValueError) as exc:
            raise ParseError(f"field 'gates[{k}]': entries must be [re, im] pairs") from exc
        gates.append(np.array(vals).reshape(GATE_DIM, GATE_DIM))
    try:
        return Circuit(arch, tuple(gates))
    except (BadShape, ValueError) as exc:
        raise ParseError(f"field 'gates': {exc}") from exc
