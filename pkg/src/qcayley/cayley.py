"""Cayley function, its inverse on unitaries, and per-gate Cayley paths.

A path runs from the worst-case gate ``base`` (x = 1) to a target gate
(x = 0); the Cayley parameter is theta = 1 - x.  Paths store the eigen-data
of h = f^{-1}(base^dagger target) so that both the gate and the
normalizing factor |Q(x)|^2 can be evaluated at any real x.
"""
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .constants import TOL
from .errors import EigenvalueNearMinusOne, NoValidPhase
from .linalg import eig_unitary, eig_unitary_batch

TAN_3PI_8 = float(np.tan(3 * np.pi / 8))


def cayley_fn(theta: float) -> complex:
    """f(theta) = (1 + i theta) / (1 - i theta), a point on the unit circle."""
    return (1 + 1j * theta) / (1 - 1j * theta)


def _check_minus_one(phases, eta):
    gap = np.pi - np.abs(np.asarray(phases))
    if np.any(gap < eta):
        raise EigenvalueNearMinusOne(
            f"eigenphase within {gap.min():.2e} of pi; inverse Cayley map undefined")


def cayley_inverse_unitary(w, eta: float = TOL.minus_one_eta) -> np.ndarray:
    """Hermitian h with f(h) = W; eigenvalues of h are tan(phi/2)."""
    es = eig_unitary(w)
    _check_minus_one(es.values, eta)
    v = es.vectors
    return (v * np.tan(es.values / 2)[None, :]) @ v.conj().T


def cayley_apply(h) -> np.ndarray:
    """Spectral application of f to a Hermitian matrix (f(h) = (1+ih)(1-ih)^{-1})."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(len(h))
    return (eye + 1j * h) @ np.linalg.inv(eye - 1j * h)


def embed_single(g) -> np.ndarray:
    """Embed a one-qubit gate as g (x) I acting on (qubit, neighbour)."""
    return np.kron(np.asarray(g, dtype=complex), np.eye(2))


@dataclass(frozen=True, eq=False)
class GatePath:
    base: np.ndarray
    h_alphas: np.ndarray
    psi: np.ndarray
    qubits: tuple = (0, 1)
    _hp_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def r_alphas(self) -> np.ndarray:
        return np.sqrt(1.0 + self.h_alphas ** 2)

    @property
    def u_alphas(self) -> np.ndarray:
        return np.arctan(self.h_alphas)

    @property
    def h_norm(self) -> float:
        return float(np.max(np.abs(self.h_alphas)))

    @property
    def target(self) -> np.ndarray:
        return gate_at(self, 0.0)

    def hp_data(self, prec: int):
        """(h_alphas, projectors base|psi><psi|) as mpmath values at ``prec`` bits.

        The eigenvectors are re-orthonormalized at the working precision, so
        the x = 1 endpoint reproduces ``base`` to that precision.
        """
        if prec not in self._hp_cache:
            with mpmath.workprec(prec):
                cols = [[mpmath.mpc(complex(z)) for z in self.psi[:, a]]
                        for a in range(self.psi.shape[1])]
                ortho = []
                for col in cols:
                    for o in ortho:
                        proj = mpmath.fsum(mpmath.conj(oi) * ci for oi, ci in zip(o, col))
                        col = [ci - proj * oi for ci, oi in zip(col, o)]
                    nrm = mpmath.sqrt(mpmath.fsum(abs(ci) ** 2 for ci in col))
                    ortho.append([ci / nrm for ci in col])
                base = _to_mp(self.base)
                projs = []
                for o in ortho:
                    vec = np.array(o, dtype=object)
                    outer = np.outer(vec, np.array([mpmath.conj(z) for z in o], dtype=object))
                    projs.append(base @ outer)
                hs = [mpmath.mpf(float(h)) for h in self.h_alphas]
            self._hp_cache[prec] = (hs, projs)
        return self._hp_cache[prec]


def _to_mp(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    out = np.empty(a.shape, dtype=object)
    for idx, z in np.ndenumerate(a):
        out[idx] = mpmath.mpc(z.real, z.imag)
    return out


def _path_from_eigen(base, phases, vecs, qubits, eta):
    _check_minus_one(phases, eta)
    return GatePath(base=np.array(base, dtype=complex), h_alphas=np.tan(phases / 2),
                    psi=np.array(vecs), qubits=tuple(qubits))


def make_gate_path(base, target, qubits=(0, 1), eta: float = TOL.minus_one_eta) -> GatePath:
    """Cayley path with gate_at(path, 1) = base and gate_at(path, 0) = target."""
    base = np.asarray(base, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if base.shape != target.shape:
        raise ValueError("base and target must have the same shape")
    es = eig_unitary(base.conj().T @ target)
    return _path_from_eigen(base, es.values, es.vectors, qubits, eta)


def make_gate_paths_batch(bases, targets, qubits=(0, 1), eta: float = TOL.minus_one_eta):
    """Vectorized make_gate_path over stacks of (base, target) pairs."""
    bases = np.asarray(bases, dtype=complex)
    targets = np.asarray(targets, dtype=complex)
    w = np.conj(np.swapaxes(bases, 1, 2)) @ targets
    phases, vecs = eig_unitary_batch(w)
    return [_path_from_eigen(b, ph, v, qubits, eta) for b, ph, v in zip(bases, phases, vecs)]


def gate_at(path: GatePath, x, prec: int | None = None):
    """The gate sum_a f((1-x) h_a) base|psi_a><psi_a| at path position x.

    With ``prec`` set, the result is an object array of mpmath.mpc values
    computed with ``prec`` bits of mantissa.
    """
    if prec is None:
        theta = 1.0 - float(x)
        if theta == 0.0:
            return path.base.copy()
        f = (1 + 1j * theta * path.h_alphas) / (1 - 1j * theta * path.h_alphas)
        return path.base @ (path.psi * f[None, :]) @ path.psi.conj().T
    hs, projs = path.hp_data(prec)
    with mpmath.workprec(prec):
        theta = 1 - mpmath.mpf(x)
        if theta == 0:
            return sum(projs[1:], projs[0].copy())
        out = None
        for h, p in zip(hs, projs):
            f = (1 + 1j * theta * h) / (1 - 1j * theta * h)
            term = p * f
            out = term if out is None else out + term
        return out


def q_factor_sq(path: GatePath, x, prec: int | None = None):
    """One gate's factor prod_a |1 + i x (h_a / r_a) e^{i u_a}|^2 of |Q(x)|^2."""
    if prec is None:
        x = float(x)
        r = path.r_alphas
        z = 1 + 1j * x * (path.h_alphas / r) * np.exp(1j * path.u_alphas)
        return float(np.prod(np.abs(z) ** 2))
    hs, _ = path.hp_data(prec)
    with mpmath.workprec(prec):
        x = mpmath.mpf(x)
        out = mpmath.mpf(1)
        for h in hs:
            r = mpmath.sqrt(1 + h * h)
            z = 1 + 1j * x * (h / r) * mpmath.expj(mpmath.atan(h))
            out *= abs(z) ** 2
        return out


def phase_align(u, c):
    """Rotate C by a global phase so U^dagger C keeps away from eigenvalue -1.

    Picks phi as the value moving the midpoint of the widest circular gap
    between eigenphases of U^dagger C onto pi.  Returns (phi, e^{i phi} C);
    afterwards every eigenphase lies in [-3pi/4, 3pi/4] for dimension <= 4.
    """
    u = np.asarray(u, dtype=complex)
    c = np.asarray(c, dtype=complex)
    phases = np.sort(eig_unitary(u.conj().T @ c).values)
    gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
    k = int(np.argmax(gaps))
    mid = phases[k] + gaps[k] / 2
    phi = float(np.angle(np.exp(1j * (np.pi - mid))))
    rotated = np.angle(np.exp(1j * (phases + phi)))
    if np.max(np.abs(rotated)) > 3 * np.pi / 4 + 1e-12:
        raise NoValidPhase(f"widest gap {gaps[k]:.3f} too small to clear -1")
    return phi, np.exp(1j * phi) * c
