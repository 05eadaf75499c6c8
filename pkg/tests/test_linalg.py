import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcayley.circuits import haar_unitary, haar_unitary_batch
from qcayley.errors import BadShape, NotHermitian, NotUnitary
from qcayley.linalg import (eig_hermitian, eig_hermitian_batch, eig_unitary, eig_unitary_batch,
                            is_unitary, max_abs, spectral_norm)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def test_diagonal_input():
    es = eig_hermitian(np.diag([1.0, 2.0]))
    assert np.allclose(es.values, [1, 2])
    assert np.allclose(np.abs(es.vectors), np.eye(2))


def test_pauli_x():
    es = eig_hermitian(np.array([[0, 1], [1, 0]]))
    assert np.allclose(es.values, [-1, 1], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_hermitian_reconstruction_and_orthonormality(n):
    rng = np.random.default_rng(n)
    for _ in range(50):
        h = random_hermitian(rng, n)
        es = eig_hermitian(h)
        assert max_abs(es.reconstruct() - h) <= 1e-10
        assert max_abs(es.vectors.conj().T @ es.vectors - np.eye(n)) <= 1e-10
        # independent oracle: LAPACK
        assert np.allclose(es.values, np.linalg.eigvalsh(h), atol=1e-10)


def test_hermitian_degenerate():
    rng = np.random.default_rng(0)
    v = haar_unitary(4, rng)
    h = v @ np.diag([1.0, 1.0, 1.0, -2.0]) @ v.conj().T
    es = eig_hermitian(h)
    assert np.allclose(es.values, [-2, 1, 1, 1], atol=1e-12)
    assert max_abs(es.reconstruct() - h) <= 1e-10


def test_hermitian_batch_matches_single():
    rng = np.random.default_rng(1)
    hs = np.stack([random_hermitian(rng, 4) for _ in range(20)])
    vals, vecs = eig_hermitian_batch(hs)
    for h, v, u in zip(hs, vals, vecs):
        assert np.allclose(v, np.linalg.eigvalsh(h), atol=1e-10)
        assert max_abs((u * v) @ u.conj().T - h) <= 1e-10


def test_not_hermitian_rejected():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_bad_shapes():
    with pytest.raises(BadShape):
        eig_hermitian(np.zeros((2, 3)))
    with pytest.raises(BadShape):
        eig_unitary(np.zeros(4))


def test_unitary_identity_and_diag():
    assert np.allclose(eig_unitary(np.eye(4)).values, 0)
    ph = eig_unitary(np.diag([1j, -1j])).values
    assert np.allclose(sorted(ph), [-np.pi / 2, np.pi / 2])


def test_unitary_determinant_oracle():
    rng = np.random.default_rng(2)
    for _ in range(100):
        u = haar_unitary(4, rng)
        es = eig_unitary(u)
        assert abs(np.prod(np.exp(1j * es.values)) - np.linalg.det(u)) <= 1e-9
        recon = (es.vectors * np.exp(1j * es.values)) @ es.vectors.conj().T
        assert max_abs(recon - u) <= 1e-10


def test_unitary_degenerate_spectrum():
    # eigenvalues e^{+i a} and e^{-i a} share a real part: needs the skew split
    rng = np.random.default_rng(3)
    v = haar_unitary(4, rng)
    u = v @ np.diag(np.exp(1j * np.array([0.7, -0.7, 0.7, 2.0]))) @ v.conj().T
    es = eig_unitary(u)
    assert np.allclose(sorted(es.values), sorted([0.7, -0.7, 0.7, 2.0]), atol=1e-9)
    recon = (es.vectors * np.exp(1j * es.values)) @ es.vectors.conj().T
    assert max_abs(recon - u) <= 1e-9


def test_unitary_batch_matches_numpy():
    rng = np.random.default_rng(4)
    us = haar_unitary_batch(4, 200, rng)
    phases, vecs = eig_unitary_batch(us)
    for u, ph in zip(us, phases):
        ref = np.sort(np.angle(np.linalg.eigvals(u)))
        assert np.allclose(np.sort(ph), ref, atol=1e-9)


def test_not_unitary_rejected():
    with pytest.raises(NotUnitary):
        eig_unitary(np.array([[1, 1], [0, 1]]))


def test_spectral_norm_examples():
    assert spectral_norm(np.eye(4)) == pytest.approx(1.0, abs=1e-12)
    assert spectral_norm(np.zeros((4, 4))) == 0.0
    u = haar_unitary(4, np.random.default_rng(5))
    assert spectral_norm(2 * u) == pytest.approx(2.0, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spectral_norm_matches_svd(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert spectral_norm(a) == pytest.approx(np.linalg.svd(a, compute_uv=False)[0], rel=1e-10)


def test_is_unitary():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert is_unitary(h, 1e-10)
    assert not is_unitary(np.array([[1, 1], [0, 1]]), 1e-10)
    u = haar_unitary(2, np.random.default_rng(6))
    assert is_unitary(u, 1e-10) == (max_abs(u.conj().T @ u - np.eye(2)) <= 1e-10)


def test_spectral_norm_submultiplicative():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert spectral_norm(a @ b) <= spectral_norm(a) * spectral_norm(b) + 1e-9
