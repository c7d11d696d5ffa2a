"""Solvers for ``rho' = L0 rho + L1 int_0^t k(t - t') rho(t') dt'``.

Three routes are provided and cross-checked in the test suite:

* :func:`assemble_propagator` -- per-block Laplace solution inverted by
  partial fractions (needs ``L0`` and ``L1`` to share eigen-projectors);
* :func:`embedded_solve` -- exact linear embedding with auxiliary memory
  variables, one matrix exponential (exponential-type kernels);
* :func:`volterra_solve` -- fixed-step Heun with trapezoidal memory integral.

:func:`stochastic_average` unravels the kernel term as a random Hamiltonian
``B(t) h`` and averages over noise paths.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import _backend
from .errors import StepTooLarge, Unsupported
from .kernel import Delta, ExpDecay, MemoryKernel, ModulatedExp, eval_time, sample_process, to_rational
from .lindblad import SpectralDecomposition, commutator_superop, dissipator
from .operators import devectorize, superop_dim, vectorize
from .rational import (
    RationalFn,
    cluster_roots,
    companion_roots,
    partial_fractions,
    partial_fractions_with_roots,
    pf_eval_time,
    reduce_fraction,
)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, d, d)
    method: str
    stderr: np.ndarray | None = None
    observable: np.ndarray | None = field(default=None, repr=False)

    def coherence(self, i: int = 0, j: int = 1) -> np.ndarray:
        return self.states[:, i, j]

    def traces(self) -> np.ndarray:
        return np.trace(self.states, axis1=1, axis2=2)


def lambda_tilde(lam: complex, mu: complex, k: MemoryKernel) -> RationalFn:
    """``1 / (s - lam - mu k~(s)) = q / ((s - lam) q - mu p)`` in lowest terms."""
    rk = to_rational(k)
    p = np.asarray(rk.p, dtype=complex)
    q = np.asarray(rk.q, dtype=complex)
    den = np.polysub(np.polymul([1.0, -lam], q), mu * p)
    return reduce_fraction(RationalFn(q, den))


def block_rates(dec: SpectralDecomposition, l1: np.ndarray, tol: float = 1e-8) -> list[complex]:
    """Eigenvalues ``mu_i`` with ``L1 P_i = mu_i P_i``; raises if ``L1`` does not share the blocks."""
    out = []
    for b in dec.blocks:
        p = b.projector
        mu = np.trace(l1 @ p) / np.trace(p)
        if not np.allclose(l1 @ p, mu * p, atol=tol, rtol=0) or not np.allclose(
            p @ l1, mu * p, atol=tol, rtol=0
        ):
            raise ValueError("L1 does not share the spectral blocks of L0")
        out.append(complex(mu))
    return out


def _block_laplace_terms(lam, mu, k, index):
    """Partial fractions of ``Lambda~^(j+1)`` for ``j = 0..index-1``."""
    base = lambda_tilde(lam, mu, k)
    pf = partial_fractions(base)
    clusters = [(t.root, t.multiplicity) for t in pf.terms]
    out = [pf]
    for j in range(1, index):
        power = base ** (j + 1)
        out.append(partial_fractions_with_roots(power, [(r, m * (j + 1)) for r, m in clusters]))
    return out


def assemble_propagator(
    dec: SpectralDecomposition, mu: Sequence[complex], k: MemoryKernel, t
) -> np.ndarray:
    """``Phi(t) = sum_i Lambda_i(t) P_i + sum_k L^-1[Lambda~_i^(k+1)](t) D_i^k``.

    ``mu[i]`` is the ``L1`` eigenvalue on block ``i``. ``t`` may be a scalar
    (returns one superoperator) or an array (returns a stack).
    """
    if len(mu) != len(dec.blocks):
        raise ValueError("need one L1 eigenvalue per block")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0):
        raise ValueError("t must be non-negative")
    n = dec.blocks[0].projector.shape[0]
    out = np.zeros((len(times), n, n), dtype=complex)
    for block, m in zip(dec.blocks, mu):
        index = block.index if block.nilpotent is not None else 1
        pfs = _block_laplace_terms(block.eigenvalue, m, k, index)
        out += pf_eval_time(pfs[0], times)[:, None, None] * block.projector
        dpow = np.eye(n, dtype=complex)
        for j in range(1, index):
            dpow = dpow @ block.nilpotent
            out += pf_eval_time(pfs[j], times)[:, None, None] * dpow
    return out[0] if np.ndim(t) == 0 else out


def _augmented_generator(l0: np.ndarray, l1: np.ndarray, k) -> np.ndarray:
    if not isinstance(k, (ExpDecay, ModulatedExp)):
        raise Unsupported(f"embedding needs an exponential-type kernel, got {type(k).__name__}")
    n = l0.shape[0]
    eye = np.eye(n)
    zero = np.zeros((n, n))
    b2 = k.B**2
    a = 1.0 / k.tau_k
    if isinstance(k, ExpDecay):
        return np.block([[l0, b2 * l1], [eye, -a * eye]])
    nu = k.nu
    return np.block(
        [
            [l0, b2 * l1, zero],
            [eye, -a * eye, -nu * eye],
            [zero, nu * eye, -a * eye],
        ]
    )


def embedded_propagator(l0: np.ndarray, l1: np.ndarray, k, t: float) -> np.ndarray:
    """Propagator ``Phi(t)`` from the exact auxiliary-variable embedding.

    With ``m(t) = int_0^t e^{-(t-s)/tau_k} rho(s) ds`` (and its cosine/sine
    pair for the modulated kernel), the memory equation becomes the linear
    ODE ``(rho, m)' = G (rho, m)`` with ``m(0) = 0``.
    """
    superop_dim(l0)
    if t < 0:
        raise ValueError("t must be non-negative")
    g = _augmented_generator(np.asarray(l0, complex), np.asarray(l1, complex), k)
    n = l0.shape[0]
    return scipy.linalg.expm(t * g)[:n, :n]


def embedded_solve(l0, l1, k, rho0: np.ndarray, t: float) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    return devectorize(embedded_propagator(l0, l1, k, t) @ vectorize(rho0), rho0.shape[0])


def embedded_trajectory(l0, l1, k, rho0, times) -> Trajectory:
    """Embedded solution on a grid, using one exponential per step size."""
    rho0 = np.asarray(rho0, dtype=complex)
    times = np.asarray(times, dtype=float)
    g = _augmented_generator(np.asarray(l0, complex), np.asarray(l1, complex), k)
    n = l0.shape[0]
    x0 = np.zeros(g.shape[0], dtype=complex)
    x0[:n] = vectorize(rho0)
    states = np.array([devectorize((scipy.linalg.expm(t * g) @ x0)[:n]) for t in times])
    return Trajectory(times=times, states=states, method="embedded")


def _opnorm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def volterra_solve(l0, l1, k: MemoryKernel, rho0, dt: float, horizon: float) -> Trajectory:
    """Fixed-step Heun integration with trapezoidal memory quadrature.

    Global error is ``O(dt^2)``. The number of steps is ``round(horizon/dt)``.
    """
    if isinstance(k, Delta):
        raise Unsupported("volterra_solve needs a kernel with pointwise values")
    l0 = np.asarray(l0, dtype=complex)
    l1 = np.asarray(l1, dtype=complex)
    scales = [getattr(k, "tau_k", np.inf)]
    for op in (l0, l1):
        nrm = _opnorm(op)
        if nrm > 0:
            scales.append(1.0 / nrm)
    limit = min(scales) / 20
    if not 0 < dt <= limit * (1 + 1e-12):
        raise StepTooLarge(f"dt={dt} exceeds the stability limit {limit:.3g}")
    rho0 = np.asarray(rho0, dtype=complex)
    nsteps = int(round(horizon / dt))
    times = dt * np.arange(nsteps + 1)
    kvals = np.asarray(eval_time(k, times), dtype=float)
    hist = _backend.volterra_heun(l0, l1, kvals, vectorize(rho0), dt, nsteps)
    d = rho0.shape[0]
    states = np.array([devectorize(v, d) for v in hist])
    return Trajectory(times=times, states=states, method="volterra")


def stochastic_generator(h: np.ndarray) -> np.ndarray:
    """``L1[X] = 2 h X h - {h^2, X}``: the kernel-averaged effect of ``B(t) h``."""
    return dissipator(h, 2.0)


def stochastic_average(
    l0,
    h,
    k: ExpDecay,
    rho0,
    dt: float,
    horizon: float,
    n_traj: int,
    seed: int,
    observable: np.ndarray | None = None,
) -> Trajectory:
    """Average of ``rho' = L0 rho - i B(t) [h, rho]`` over sampled noise paths.

    Trajectory ``i`` uses the seed ``(seed, i)``. The returned ``stderr`` is
    the standard error of ``Tr[observable rho]`` (default: ``Re rho[0, 1]``)
    at each time.
    """
    h = np.asarray(h, dtype=complex)
    if not np.allclose(h, h.conj().T):
        raise ValueError("h must be Hermitian")
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[0]
    nsteps = int(round(horizon / dt))
    times = dt * np.arange(nsteps + 1)
    paths = np.array([sample_process(k, dt, nsteps + 1, (seed, i)).samples for i in range(n_traj)])
    runs = _backend.stochastic_heun(
        np.asarray(l0, dtype=complex), commutator_superop(h), paths, vectorize(rho0), dt
    )
    runs = runs.reshape(n_traj, nsteps + 1, d, d).transpose(0, 1, 3, 2)  # undo column stacking
    mean = runs.mean(axis=0)
    if observable is None:
        values = runs[:, :, 0, 1].real
    else:
        values = np.einsum("ab,ntba->nt", np.asarray(observable, dtype=complex), runs).real
    stderr = values.std(axis=0, ddof=1) / np.sqrt(n_traj) if n_traj > 1 else np.zeros(len(times))
    return Trajectory(times=times, states=mean, method="stochastic", stderr=stderr, observable=values.mean(axis=0))
