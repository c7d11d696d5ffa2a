"""Channel-quality functionals: fidelities, concurrence, Choi-based CP checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import DimensionMismatch
from .operators import SIGMA, choi, kron, pure_state, superop_dim, vectorize


def _drop_roundoff(w: np.ndarray) -> np.ndarray:
    # sqrt turns 1e-17 noise into 3e-9, so anything below the round-off floor is zeroed
    floor = 64 * np.finfo(float).eps * max(float(np.max(np.abs(w))), 1e-300)
    return np.where(w < floor, 0.0, w)


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix; eigenvalues at round-off level are set to zero."""
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    w = _drop_roundoff(w)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``, clamped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionMismatch("states have different dimensions")
    s = psd_sqrt(rho)
    w = np.linalg.eigvalsh(0.5 * (s @ sigma @ s + (s @ sigma @ s).conj().T))
    val = float(np.sum(np.sqrt(_drop_roundoff(w))) ** 2)
    return min(max(val, 0.0), 1.0)


@dataclass(frozen=True)
class FidelityReport:
    value: float
    argmin_state: np.ndarray
    samples: int


def pure_fidelities(superop: np.ndarray, psis: np.ndarray) -> np.ndarray:
    """``<psi| Phi(|psi><psi|) |psi>`` for each row of ``psis``."""
    psis = np.atleast_2d(np.asarray(psis, dtype=complex))
    d = psis.shape[1]
    rhos = psis[:, :, None] * psis[:, None, :].conj()
    vecs = rhos.transpose(0, 2, 1).reshape(len(psis), d * d)  # column stacking
    out = (vecs @ superop.T).reshape(len(psis), d, d).transpose(0, 2, 1)
    return np.einsum("na,nab,nb->n", psis.conj(), out, psis).real


def _bloch_vector(theta, phi) -> np.ndarray:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def min_channel_fidelity(
    superop: np.ndarray, grid: int = 64, refine: int = 20, samples: int = 4096, seed: int = 0
) -> FidelityReport:
    """Minimum of ``F(psi, Phi(psi))`` over pure states.

    Qubits use a deterministic ``grid x grid`` mesh on the Bloch angles; larger
    systems use ``samples`` seeded Haar-random states. The best point is then
    polished with ``refine`` Nelder-Mead iterations. The result is a sampled
    minimum and therefore an upper bound on the true value.
    """
    d = superop_dim(superop)
    tp = vectorize(np.eye(d)) @ superop
    if not np.allclose(tp, vectorize(np.eye(d)), atol=1e-8):
        raise ValueError("channel is not trace preserving")

    if d == 2:
        th, ph = np.meshgrid(np.linspace(0, np.pi, grid), np.linspace(0, 2 * np.pi, grid, endpoint=False), indexing="ij")
        psis = np.stack([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)], axis=-1).reshape(-1, 2)
        params = np.stack([th.ravel(), ph.ravel()], axis=1)

        def to_psi(x):
            return _bloch_vector(x[0], x[1])
    else:
        rng = np.random.default_rng(seed)
        z = rng.normal(size=(samples, d)) + 1j * rng.normal(size=(samples, d))
        psis = z / np.linalg.norm(z, axis=1, keepdims=True)
        params = np.concatenate([psis.real, psis.imag], axis=1)

        def to_psi(x):
            v = x[:d] + 1j * x[d:]
            return v / np.linalg.norm(v)

    fids = pure_fidelities(superop, psis)
    best = int(np.argmin(fids))  # lowest index wins ties
    x0 = params[best]
    value = float(fids[best])
    count = len(psis)
    if refine > 0:
        res = scipy.optimize.minimize(
            lambda x: pure_fidelities(superop, to_psi(x)[None, :])[0],
            x0,
            method="Nelder-Mead",
            options={"maxiter": refine, "xatol": 1e-10, "fatol": 1e-14},
        )
        count += res.nfev
        if res.fun < value:
            value, x0 = float(res.fun), res.x
    return FidelityReport(value=min(max(value, 0.0), 1.0), argmin_state=pure_state(to_psi(x0)), samples=count)


SPIN_FLIP = kron(SIGMA[2], SIGMA[2])


def concurrence(rho: np.ndarray) -> float:
    """Two-qubit concurrence from the spectrum of ``sqrt(sqrt(rho) Y rho* Y sqrt(rho))``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionMismatch("concurrence needs a two-qubit state")
    s = psd_sqrt(rho)
    m = s @ SPIN_FLIP @ rho.conj() @ SPIN_FLIP @ s
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    lam = np.sort(np.sqrt(_drop_roundoff(w)))[::-1]
    return float(min(max(lam[0] - lam[1] - lam[2] - lam[3], 0.0), 1.0))


@dataclass(frozen=True)
class CPReport:
    min_choi_eigenvalue: float
    is_cp: bool
    is_tp: bool
    tol: float
    hermiticity_error: float


def cp_check(superop: np.ndarray, tol: float = 1e-10, tp_tol: float = 1e-8) -> CPReport:
    """Complete positivity and trace preservation from the Choi matrix."""
    d = superop_dim(superop)
    c = choi(superop)
    herm = 0.5 * (c + c.conj().T)
    err = float(np.max(np.abs(herm - c)))
    if err >= 1e-9:
        raise ValueError(f"map is not Hermiticity preserving (Choi asymmetry {err:.2g})")
    lam_min = float(np.linalg.eigvalsh(herm)[0])
    # partial trace over the output factor
    ptr = np.trace(herm.reshape(d, d, d, d), axis1=1, axis2=3)
    is_tp = bool(np.allclose(ptr, np.eye(d), atol=tp_tol, rtol=0))
    return CPReport(lam_min, lam_min >= -tol, is_tp, tol, err)


def choi_min_eigenvalues(superops: np.ndarray) -> np.ndarray:
    """Smallest Choi eigenvalue for each superoperator in a stack ``(m, d^2, d^2)``."""
    s = np.asarray(superops, dtype=complex)
    m, n, _ = s.shape
    d = superop_dim(s[0])
    c = s.reshape(m, d, d, d, d).transpose(0, 4, 2, 3, 1).reshape(m, n, n)
    c = 0.5 * (c + np.conj(np.swapaxes(c, 1, 2)))
    return np.linalg.eigvalsh(c)[:, 0]


def op_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest singular value of ``a - b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.linalg.norm(a - b, 2))
