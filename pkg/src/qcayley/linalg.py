"""Small dense complex linear algebra.

Everything here targets matrices of dimension <= 4 (two-qubit gates).  The
core is a cyclic complex Jacobi eigensolver that works on a stack of
matrices at once, so that sampling experiments can diagonalize 1e5 gates
without a Python loop per matrix.
"""
from dataclasses import dataclass

import numpy as np

from .constants import TOL
from .errors import BadShape, NoConvergence, NotHermitian, NotUnitary


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues and orthonormal eigenvectors (stored as columns)."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values[None, :]) @ v.conj().T


def _as_cmatrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BadShape(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def max_abs(a) -> float:
    """Entrywise max-norm."""
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def _jacobi_batch(a: np.ndarray, offdiag_tol=TOL.jacobi_offdiag,
                  max_sweeps=TOL.jacobi_max_sweeps):
    """Cyclic Jacobi on a stack of Hermitian matrices of shape (B, n, n).

    Returns ascending real eigenvalues (B, n) and eigenvectors (B, n, n).
    """
    a = np.array(a, dtype=complex, copy=True)
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    scale = np.maximum(1.0, np.linalg.norm(a, axis=(1, 2)))
    offmask = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.all(off <= offdiag_tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                active = mag > 1e-300
                safe = np.where(active, mag, 1.0)
                e = np.where(active, apq / safe, 1.0)
                theta = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
                sgn = np.where(theta >= 0, 1.0, -1.0)
                t = np.where(active, sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ec = e.conj()
                # columns: A <- A G, V <- V G with G = diag(1, conj(e)) @ rotation
                for m in (a, v):
                    cp = m[:, :, p].copy()
                    cq = m[:, :, q]
                    m[:, :, p] = c[:, None] * cp - (s * ec)[:, None] * cq
                    m[:, :, q] = s[:, None] * cp + (c * ec)[:, None] * cq
                rp = a[:, p, :].copy()
                rq = a[:, q, :]
                a[:, p, :] = c[:, None] * rp - (s * e)[:, None] * rq
                a[:, q, :] = s[:, None] * rp + (c * e)[:, None] * rq
    else:
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if not np.all(off <= offdiag_tol * scale):
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diagonal(a, axis1=1, axis2=2))
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


def eig_hermitian_batch(hs) -> tuple[np.ndarray, np.ndarray]:
    hs = np.asarray(hs, dtype=complex)
    asym = np.max(np.abs(hs - np.conj(np.swapaxes(hs, 1, 2))))
    if asym > TOL.hermitian:
        raise NotHermitian(f"max |H - H^dagger| = {asym:.3e}")
    return _jacobi_batch(0.5 * (hs + np.conj(np.swapaxes(hs, 1, 2))))


def eig_hermitian(h) -> EigenSystem:
    """Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.

    >>> eig_hermitian([[0, 1], [1, 0]]).values
    array([-1.,  1.])
    """
    h = _as_cmatrix(h)
    w, v = eig_hermitian_batch(h[None])
    return EigenSystem(values=w[0], vectors=v[0])


def is_unitary(u, tol: float = TOL.unitary) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def _split_clusters(u, a_vals, vecs, cluster_tol):
    """Refine eigenvectors inside near-degenerate clusters of Re(U)."""
    n = len(a_vals)
    b = (u - u.conj().T) / 2j
    start = 0
    vecs = vecs.copy()
    while start < n:
        stop = start + 1
        while stop < n and a_vals[stop] - a_vals[stop - 1] < cluster_tol:
            stop += 1
        if stop - start > 1:
            vc = vecs[:, start:stop]
            bc = vc.conj().T @ b @ vc
            _, wv = _jacobi_batch((0.5 * (bc + bc.conj().T))[None])
            vecs[:, start:stop] = vc @ wv[0]
        start = stop
    return vecs


def _phases_from_vectors(u, vecs):
    lam = np.einsum("ia,ij,ja->a", vecs.conj(), u, vecs)
    phases = np.angle(lam)
    phases = np.where(phases <= -np.pi, np.pi, phases)
    order = np.argsort(phases, kind="stable")
    return phases[order], vecs[:, order]


def eig_unitary_batch(us, cluster_tol=TOL.unitary_cluster):
    """Eigenphases in (-pi, pi] and eigenvectors for a stack of unitaries.

    U is normal, so its Hermitian part (U + U^dagger)/2 and skew part
    (U - U^dagger)/2i share eigenvectors.  The Hermitian part is diagonalized
    first; clusters where it is (nearly) degenerate are split with the skew part.
    """
    us = np.asarray(us, dtype=complex)
    nb, n, _ = us.shape
    eye = np.eye(n)
    dev = np.max(np.abs(np.conj(np.swapaxes(us, 1, 2)) @ us - eye), axis=(1, 2))
    if np.any(dev > TOL.unitary):
        raise NotUnitary(f"max |U^dagger U - I| = {dev.max():.3e}")
    herm = 0.5 * (us + np.conj(np.swapaxes(us, 1, 2)))
    a_vals, vecs = _jacobi_batch(herm)
    phases = np.empty((nb, n))
    out = np.empty_like(vecs)
    close = np.any(np.diff(a_vals, axis=1) < cluster_tol, axis=1) if n > 1 else np.zeros(nb, bool)
    for k in range(nb):
        v = vecs[k]
        if close[k]:
            v = _split_clusters(us[k], a_vals[k], v, cluster_tol)
        phases[k], out[k] = _phases_from_vectors(us[k], v)
    return phases, out


def eig_unitary(u) -> EigenSystem:
    """Eigenphases (in (-pi, pi], ascending) and eigenvectors of a unitary.

    The returned EigenSystem stores the phases; use ``np.exp(1j * values)``
    for the eigenvalues themselves.
    """
    u = _as_cmatrix(u)
    if not is_unitary(u, TOL.unitary):
        raise NotUnitary(f"max |U^dagger U - I| = {max_abs(u.conj().T @ u - np.eye(len(u))):.3e}")
    phases, vecs = eig_unitary_batch(u[None])
    return EigenSystem(values=phases[0], vectors=vecs[0])


def spectral_norm(a) -> float:
    """Largest singular value, from the spectrum of A^dagger A."""
    a = _as_cmatrix(a)
    w = eig_hermitian(a.conj().T @ a).values
    return float(np.sqrt(max(w[-1], 0.0)))
