"""Dense operator substrate.

Conventions used throughout the package:

* Computational basis ``|0>, |1>`` per qubit, multi-qubit states in
  lexicographic (kron) order.
* ``sigma_3 = |1><1| - |0><0| = diag(-1, +1)``. To keep the Pauli algebra
  ``sigma_1 sigma_2 = i sigma_3`` this fixes ``sigma_2 = [[0, i], [-i, 0]]``
  and makes ``sigma_+ = (sigma_1 + i sigma_2)/2 = |1><0|`` the raising
  operator.
* Superoperators act on column-stacked vectors: ``vec(X)[a + d*b] = X[a, b]``.
  :func:`vectorize` / :func:`devectorize` are the only places that encode this.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch

ATOL_STRUCT = 1e-10
ATOL_ALG = 1e-12

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, 1j], [-1j, 0]], dtype=complex),
    np.array([[-1, 0], [0, 1]], dtype=complex),
)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.conj().T.copy()


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product, ``(A x B)[i*rB + k, j*cB + l] = A[i, j] * B[k, l]``."""
    return np.kron(np.asarray(a), np.asarray(b))


def pauli_string(indices: Sequence[int]) -> np.ndarray:
    """Return ``sigma_{n1} x ... x sigma_{nN}`` for indices in {0, 1, 2, 3}."""
    indices = tuple(indices)
    if not indices:
        raise ValueError("Pauli string needs at least one index")
    for n in indices:
        if n not in (0, 1, 2, 3):
            raise ValueError(f"invalid Pauli index {n!r}")
    return reduce(kron, (SIGMA[n] for n in indices))


def vectorize(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {x.shape}")
    return x.reshape(-1, order="F")


def devectorize(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimensionMismatch(f"vector of length {v.size} is not d^2 for d={d}")
    return v.reshape((d, d), order="F")


def superop_dim(superop: np.ndarray) -> int:
    """System dimension ``d`` of a ``d^2 x d^2`` superoperator."""
    n = superop.shape[0]
    d = int(round(np.sqrt(n)))
    if superop.ndim != 2 or superop.shape != (n, n) or d * d != n:
        raise DimensionMismatch(f"not a superoperator shape: {superop.shape}")
    return d


def sandwich_superop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> A X B`` on column-stacked vectors, i.e. ``B^T x A``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"incompatible shapes {a.shape} and {b.shape}")
    return kron(b.T, a)


def apply_superop(superop: np.ndarray, x: np.ndarray) -> np.ndarray:
    d = superop_dim(superop)
    if x.shape != (d, d):
        raise DimensionMismatch(f"superoperator on d={d} applied to {x.shape}")
    return devectorize(superop @ vectorize(x), d)


def identity_superop(d: int) -> np.ndarray:
    return np.eye(d * d, dtype=complex)


def choi(superop: np.ndarray) -> np.ndarray:
    """Unnormalized Choi matrix ``sum_ij |i><j| x Phi(|i><j|)``."""
    d = superop_dim(superop)
    # column stacking: superop[a + d b, i + d j] = Phi(|i><j|)[a, b]
    s4 = np.asarray(superop, dtype=complex).reshape(d, d, d, d)  # (b, a, j, i)
    return s4.transpose(3, 1, 2, 0).reshape(d * d, d * d)


def is_state(rho: np.ndarray, tol: float = ATOL_STRUCT) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -tol)


def check_state(rho: np.ndarray, tol: float = ATOL_STRUCT) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if not is_state(rho, tol):
        raise ValueError("matrix is not a density matrix within tolerance")
    return rho


def pure_state(psi: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre ensemble."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
