"""Lindblad generators, spectral decompositions and Markovian propagators."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DefectiveMatrix, DimensionMismatch, OscillatorySpectrum, SingularPoint
from .operators import (
    SIGMA,
    SIGMA_MINUS,
    SIGMA_PLUS,
    pauli_string,
    sandwich_superop,
    superop_dim,
)

CLUSTER_TOL = 1e-7
COND_MAX = 1e8


@dataclass
class LindbladGenerator:
    """``L[X] = -i[H, X] + sum_j rate_j (A_j X A_j^+ - 1/2 {A_j^+ A_j, X})``."""

    hamiltonian: np.ndarray | None = None
    jumps: list[tuple[np.ndarray, float]] = field(default_factory=list)
    dim: int | None = None

    def __post_init__(self):
        dims = set()
        if self.hamiltonian is not None:
            self.hamiltonian = np.asarray(self.hamiltonian, dtype=complex)
            dims.add(self.hamiltonian.shape)
        jumps = []
        for op, rate in self.jumps:
            op = np.asarray(op, dtype=complex)
            if not rate > 0:
                raise ValueError(f"jump rates must be positive, got {rate}")
            dims.add(op.shape)
            jumps.append((op, float(rate)))
        self.jumps = jumps
        if self.dim is not None:
            dims.add((self.dim, self.dim))
        if len(dims) != 1:
            raise DimensionMismatch(f"inconsistent or missing operator shapes: {dims}")
        (shape,) = dims
        if len(shape) != 2 or shape[0] != shape[1]:
            raise DimensionMismatch(f"operators must be square, got {shape}")
        self.dim = shape[0]


def dissipator(op: np.ndarray, rate: float = 1.0) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    eye = np.eye(op.shape[0], dtype=complex)
    ada = op.conj().T @ op
    return rate * (
        sandwich_superop(op, op.conj().T)
        - 0.5 * sandwich_superop(ada, eye)
        - 0.5 * sandwich_superop(eye, ada)
    )


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> [h, X]``."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0], dtype=complex)
    return sandwich_superop(h, eye) - sandwich_superop(eye, h)


def build_generator(g: LindbladGenerator) -> np.ndarray:
    d = g.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    if g.hamiltonian is not None:
        out += -1j * commutator_superop(g.hamiltonian)
    for op, rate in g.jumps:
        out += dissipator(op, rate)
    return out


def dephasing_generator(gamma: float, axis: int, n_qubits: int = 1) -> LindbladGenerator:
    """``L[X] = gamma (A X A - X)`` with ``A = sigma_axis^{x N}``.

    ``gamma = 0`` gives a generator with no jumps (the zero superoperator).
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"dephasing axis must be 1, 2 or 3, got {axis!r}")
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    a = pauli_string([axis] * n_qubits)
    jumps = [(a, gamma)] if gamma > 0 else []
    return LindbladGenerator(jumps=jumps, dim=2**n_qubits)


def dephasing_pair(gamma: float, axis: int, n_qubits: int = 1, on=None):
    """``(L0, L1)`` for dephasing along ``A``, with ``L1[X] = (A X A - X) / 2``.

    ``L1`` has eigenvalue ``-1`` on the decaying block so the kernel amplitude
    carries the whole coupling. ``on`` restricts ``A`` to a subset of qubits.
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"dephasing axis must be 1, 2 or 3, got {axis!r}")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    targets = range(n_qubits) if on is None else set(on)
    a = pauli_string([axis if q in targets else 0 for q in range(n_qubits)])
    swap = sandwich_superop(a, a) - np.eye(4**n_qubits)
    return (gamma * swap).astype(complex), (0.5 * swap).astype(complex)


def thermal_generator(gamma_minus: float, gamma_plus: float, gamma_z: float):
    """Return ``(L0, L1)`` for the thermal qubit.

    ``L0`` has jumps ``sigma_-`` (rate ``gamma_minus``) and ``sigma_+`` (rate
    ``gamma_plus``); ``L1[X] = gamma_z (sigma_3 X sigma_3 - X)``.
    """
    if not gamma_minus > 0 or gamma_plus < 0 or gamma_z < 0:
        raise ValueError("need gamma_minus > 0, gamma_plus >= 0, gamma_z >= 0")
    jumps = [(SIGMA_MINUS, gamma_minus)]
    if gamma_plus > 0:
        jumps.append((SIGMA_PLUS, gamma_plus))
    l0 = build_generator(LindbladGenerator(jumps=jumps))
    z = SIGMA[3]
    l1 = gamma_z * (sandwich_superop(z, z) - np.eye(4))
    return l0, l1.astype(complex)


@dataclass(frozen=True)
class SpectralBlock:
    eigenvalue: complex
    projector: np.ndarray
    nilpotent: np.ndarray | None = None
    index: int = 1  # smallest m with nilpotent**m == 0

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.projector).real))


@dataclass(frozen=True)
class SpectralDecomposition:
    blocks: tuple[SpectralBlock, ...]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([b.eigenvalue for b in self.blocks])

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.blocks[0].projector)
        for b in self.blocks:
            out = out + b.eigenvalue * b.projector
            if b.nilpotent is not None:
                out = out + b.nilpotent
        return out

    def check(self, tol: float = 1e-8) -> None:
        """Raise ``AssertionError`` if the projector algebra fails."""
        n = self.blocks[0].projector.shape[0]
        total = sum(b.projector for b in self.blocks)
        assert np.allclose(total, np.eye(n), atol=tol, rtol=0), "projectors incomplete"
        for i, bi in enumerate(self.blocks):
            for j, bj in enumerate(self.blocks):
                want = bi.projector if i == j else 0
                assert np.allclose(bi.projector @ bj.projector, want, atol=tol, rtol=0), (
                    f"P{i} P{j} != delta P{i}"
                )
                if bi.nilpotent is not None:
                    want = bi.nilpotent if i == j else 0
                    assert np.allclose(bi.nilpotent @ bj.projector, want, atol=tol, rtol=0)
                    assert np.allclose(bj.projector @ bi.nilpotent, want, atol=tol, rtol=0)
            if bi.nilpotent is not None:
                power = np.linalg.matrix_power(bi.nilpotent, bi.index)
                assert np.allclose(power, 0, atol=tol, rtol=0), "nilpotent index wrong"


def cluster_eigenvalues(values: Sequence[complex], tol: float = CLUSTER_TOL) -> list[list[int]]:
    """Single-linkage clusters of indices whose eigenvalues lie within ``tol``."""
    values = np.asarray(values)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    # deterministic order: decreasing real part, then imaginary part
    clusters = list(groups.values())
    clusters.sort(key=lambda idx: (-values[idx].real.mean(), values[idx].imag.mean()))
    return clusters


def spectral_decompose(
    superop: np.ndarray, cluster_tol: float = CLUSTER_TOL, cond_max: float = COND_MAX
) -> SpectralDecomposition:
    """Numerical eigen-projector decomposition of a diagonalizable superoperator.

    Nilpotent parts are never produced here; a superoperator whose eigenvector
    matrix has condition number above ``cond_max`` raises
    :class:`DefectiveMatrix`, and callers must supply an analytic
    decomposition instead.
    """
    superop_dim(superop)
    w, v = np.linalg.eig(superop)
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > cond_max:
        raise DefectiveMatrix(f"eigenvector condition number {cond:.3g} exceeds {cond_max:.1g}")
    vinv = np.linalg.inv(v)
    blocks = []
    for idx in cluster_eigenvalues(w, cluster_tol):
        proj = v[:, idx] @ vinv[idx, :]
        lam = complex(w[idx].mean())
        blocks.append(SpectralBlock(eigenvalue=lam, projector=proj))
    return SpectralDecomposition(tuple(blocks))


def evolve_markov(superop: np.ndarray, t: float) -> np.ndarray:
    """``exp(t L)``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return scipy.linalg.expm(t * np.asarray(superop, dtype=complex))


def steady_state_projector(superop: np.ndarray, tol: float = CLUSTER_TOL) -> np.ndarray:
    """Sum of the eigen-projectors with zero eigenvalue."""
    dec = spectral_decompose(superop)
    n = superop.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for b in dec.blocks:
        lam = b.eigenvalue
        if abs(lam) <= tol:
            out += b.projector
        elif abs(lam.real) <= tol:
            raise OscillatorySpectrum(f"eigenvalue {lam} is purely imaginary")
    return out


def resolvent(superop: np.ndarray, z: complex, tol: float = 1e-8) -> np.ndarray:
    """``(z - L)^{-1}``."""
    superop_dim(superop)
    w = np.linalg.eigvals(superop)
    dist = np.min(np.abs(z - w))
    if dist <= tol:
        raise SingularPoint(f"z={z} is within {dist:.2g} of the spectrum")
    n = superop.shape[0]
    return np.linalg.solve(z * np.eye(n) - superop, np.eye(n, dtype=complex))


@dataclass(frozen=True)
class ThermalSpectral:
    """Closed-form eigen-structure of the thermal-qubit generator.

    ``P_i[X] = Tr[L_i X] R_i`` with eigenvalues ``0, -G/2, -G/2, -G`` where
    ``G = gamma_minus + gamma_plus`` and ``x = gamma_plus / gamma_minus``.
    """

    gamma_minus: float
    gamma_plus: float

    @property
    def total_rate(self) -> float:
        return self.gamma_minus + self.gamma_plus

    @property
    def x(self) -> float:
        return self.gamma_plus / self.gamma_minus

    @property
    def eigenvalues(self) -> np.ndarray:
        g = self.total_rate
        return np.array([0.0, -g / 2, -g / 2, -g])

    @property
    def right(self) -> list[np.ndarray]:
        x = self.x
        s0, _, _, s3 = SIGMA
        return [s0 - (1 - x) / (1 + x) * s3, SIGMA_MINUS, SIGMA_PLUS, -0.5 * s3]

    @property
    def left(self) -> list[np.ndarray]:
        x = self.x
        s0, _, _, s3 = SIGMA
        return [0.5 * s0, SIGMA_PLUS, SIGMA_MINUS, (x - 1) / (x + 1) * s0 - s3]

    def projectors(self) -> list[np.ndarray]:
        # Tr[L X] = vec(L^T) . vec(X)
        return [
            np.outer(r.reshape(-1, order="F"), lo.T.reshape(-1, order="F"))
            for lo, r in zip(self.left, self.right)
        ]

    def decomposition(self) -> SpectralDecomposition:
        projs = self.projectors()
        lam = self.eigenvalues
        blocks = (
            SpectralBlock(complex(lam[0]), projs[0]),
            SpectralBlock(complex(lam[1]), projs[1] + projs[2]),
            SpectralBlock(complex(lam[3]), projs[3]),
        )
        return SpectralDecomposition(blocks)

    def steady_state(self) -> np.ndarray:
        x = self.x
        return np.diag([1.0, x]).astype(complex) / (1 + x)
