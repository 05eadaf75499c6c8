"""Numerical tolerances shared across the package.

Every threshold the library relies on lives here so precision policy can be
audited in one place.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    unitary: float = 1e-10
    # Jacobi stops once the off-diagonal Frobenius norm drops below this
    # (relative to max(1, ||A||_F)).
    jacobi_offdiag: float = 1e-14
    jacobi_max_sweeps: int = 100
    # A's eigenvalues closer than this are treated as one cluster when
    # splitting a unitary's spectrum with the skew part.
    unitary_cluster: float = 1e-5
    # Eigenphases within this distance of pi make the inverse Cayley map blow up.
    minus_one_eta: float = 1e-9
    path_unitary: float = 1e-9
    statevector_norm: float = 1e-9
    # Strict right end of W's half-open interval: p(1) <= r - margin * (r - l).
    w_margin: float = 2.0 ** -60
    lp_feasibility: float = 1e-9
    fit_max_condition: float = 1e14


TOL = Tolerances()

DEFAULT_PRECISION_BITS = 256
DEFAULT_BINARY_ITERS = 128
MAX_QUBITS = 24
