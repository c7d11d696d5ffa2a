"""Memory kernels and a stationary Gaussian noise sampler.

Kernel strengths carry the full coupling: the magnitude of the ``L1``
eigenvalue is absorbed into ``B``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.signal

from .errors import DeltaNotEvaluable, Unsupported
from .rational import (
    COMMON_ROOT_TOL,
    RationalFn,
    companion_roots,
    partial_fractions,
    pf_eval_time,
)


@dataclass(frozen=True)
class Delta:
    """``w * delta(t)``: the Markovian limit."""

    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("delta weight must be non-negative")


@dataclass(frozen=True)
class ExpDecay:
    """``B^2 exp(-t / tau_k)``."""

    B: float
    tau_k: float

    def __post_init__(self):
        if not self.tau_k > 0:
            raise ValueError("tau_k must be positive")


@dataclass(frozen=True)
class ModulatedExp:
    """``B^2 exp(-t / tau_k) cos(nu t)``."""

    B: float
    tau_k: float
    nu: float

    def __post_init__(self):
        if not self.tau_k > 0:
            raise ValueError("tau_k must be positive")
        if self.nu < 0:
            raise ValueError("nu must be non-negative")


@dataclass(frozen=True)
class Rational:
    """Kernel given by its Laplace transform ``p(s)/q(s)`` with real coefficients.

    ``constant=True`` marks the degree-0 form produced for a delta kernel.
    """

    p: tuple[float, ...]
    q: tuple[float, ...]
    constant: bool = False

    def __post_init__(self):
        p = tuple(float(c) for c in np.trim_zeros(np.atleast_1d(self.p), "f")) or (0.0,)
        q = tuple(float(c) for c in np.trim_zeros(np.atleast_1d(self.q), "f"))
        if not q:
            raise ValueError("denominator is zero")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if self.constant:
            if len(p) != 1 or len(q) != 1:
                raise ValueError("constant kernel must have degree-0 p and q")
            return
        if len(p) >= len(q) and any(p):
            raise ValueError("need deg p < deg q")
        if any(p) and len(p) > 1:
            for z in companion_roots(p):
                scale = max(1.0, abs(z)) ** (len(q) - 1) * max(abs(c) for c in q)
                if abs(np.polyval(q, z)) <= COMMON_ROOT_TOL * scale:
                    raise ValueError(f"p and q share the root {z}")

    @property
    def fn(self) -> RationalFn:
        return RationalFn(np.array(self.p), np.array(self.q))

    def __call__(self, s):
        return self.fn(s)


MemoryKernel = Union[Delta, ExpDecay, ModulatedExp, Rational]


def eval_time(k: MemoryKernel, t):
    """Kernel value ``k(t)`` for ``t >= 0`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("kernel is evaluated for t >= 0 only")
    if isinstance(k, Delta) or (isinstance(k, Rational) and k.constant):
        raise DeltaNotEvaluable("a delta kernel has no pointwise value")
    if isinstance(k, ExpDecay):
        out = k.B**2 * np.exp(-t / k.tau_k)
    elif isinstance(k, ModulatedExp):
        out = k.B**2 * np.exp(-t / k.tau_k) * np.cos(k.nu * t)
    elif isinstance(k, Rational):
        if not any(k.p):
            out = np.zeros_like(t)
        else:
            out = np.real(pf_eval_time(partial_fractions(k.fn), t))
    else:
        raise Unsupported(f"unknown kernel {k!r}")
    return out if out.ndim else float(out)


def to_rational(k: MemoryKernel) -> Rational:
    """Laplace transform as ``p(s)/q(s)``."""
    if isinstance(k, Rational):
        return k
    if isinstance(k, Delta):
        return Rational((k.weight,), (1.0,), constant=True)
    b2 = k.B**2
    a = 1.0 / k.tau_k
    if isinstance(k, ExpDecay):
        return Rational((b2,), (1.0, a))
    if isinstance(k, ModulatedExp):
        # q(-a) = nu^2: below the common-root tolerance the pole pair collapses onto the zero
        if k.nu**2 <= COMMON_ROOT_TOL * max(1.0, a) ** 2 * max(1.0, 2 * a, a * a + k.nu**2):
            return Rational((b2,), (1.0, a))
        if b2 == 0:
            return Rational((0.0,), (1.0, 2 * a, a * a + k.nu**2))
        return Rational((b2, b2 * a), (1.0, 2 * a, a * a + k.nu**2))
    raise Unsupported(f"unknown kernel {k!r}")


@dataclass(frozen=True)
class NoisePath:
    dt: float
    samples: np.ndarray
    seed: object

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.samples))


def sample_process(k: ExpDecay, dt: float, n: int, seed) -> NoisePath:
    """Stationary Gaussian path with ``<B(t) B(t')> = k(t - t')``.

    Uses the exact one-step update of the Ornstein-Uhlenbeck process, so the
    lag-``m`` autocorrelation is exactly ``B^2 exp(-m dt / tau_k)``. ``seed``
    is anything ``numpy.random.default_rng`` accepts (an int or a tuple of
    ints).
    """
    if not isinstance(k, ExpDecay):
        raise Unsupported("only exponential kernels have an OU sampler")
    if not dt > 0 or n < 1:
        raise ValueError("need dt > 0 and n >= 1")
    rng = np.random.default_rng(seed)
    a = np.exp(-dt / k.tau_k)
    sd = abs(k.B)
    u = sd * np.sqrt(1.0 - a * a) * rng.standard_normal(n)
    u[0] *= 1.0 / np.sqrt(1.0 - a * a)  # stationary start, variance B^2
    x = scipy.signal.lfilter([1.0], [1.0, -a], u)
    return NoisePath(dt=dt, samples=x, seed=seed)
