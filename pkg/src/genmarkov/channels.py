"""Closed-form dephasing channels with exponential and modulated memory kernels.

For the dephasing background ``L0[X] = gamma (A X A - X)`` with ``L1``
proportional to ``L0`` the whole evolution is the Pauli channel
``X -> (1 - p) X + p A X A`` with ``p = (1 - Lambda(t)) / 2``, where
``Lambda`` is the inverse Laplace transform of the decaying block.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ComplexOmega, NonOscillatory
from .operators import pauli_string

OMEGA_IMAG_TOL = 1e-12
OMEGA_ZERO_BAND = 1e-6


@dataclass(frozen=True)
class ExpKernelParams:
    """Exponential kernel ``B^2 exp(-t/tau_k)`` on a rate-``gamma`` dephasing background."""

    gamma: float
    B: float
    tau_k: float

    def __post_init__(self):
        if self.gamma < 0 or not self.tau_k > 0:
            raise ValueError("need gamma >= 0 and tau_k > 0")

    @property
    def tau0(self) -> float:
        return math.inf if self.gamma == 0 else 1.0 / (2 * self.gamma)

    @property
    def inv_tau(self) -> float:
        """New decay rate ``(1/tau0 + 1/tau_k) / 2``."""
        return self.gamma + 0.5 / self.tau_k

    @property
    def offset(self) -> float:
        """``gamma - 1/(2 tau_k)``; ``omega^2 = B^2 - offset^2``."""
        return self.gamma - 0.5 / self.tau_k

    @property
    def omega(self) -> complex:
        return cmath.sqrt(self.B**2 - self.offset**2)

    @property
    def branch(self) -> str:
        om = self.omega
        if abs(om) < OMEGA_ZERO_BAND:
            return "critical"
        if abs(om.imag) < OMEGA_IMAG_TOL:
            return "real"
        return "imaginary"

    @property
    def phi(self) -> float:
        """Phase with ``tan(phi) = (gamma - 1/(2 tau_k)) / omega`` (real branch)."""
        return math.atan2(self.offset, self.omega.real)


def lambda_exp(p: ExpKernelParams, t):
    """Decay function ``Lambda(t)`` of the exponential-kernel channel.

    Real ``omega``: ``exp(-t/tau) cos(omega t + phi) / cos(phi)``; near
    ``omega = 0`` the analytic limit ``exp(-t/tau)(1 - offset t)``; imaginary
    ``omega``: the hyperbolic continuation.
    """
    t = np.asarray(t, dtype=float)
    env = np.exp(-p.inv_tau * t)
    branch = p.branch
    if branch == "real":
        om = p.omega.real
        phi = p.phi
        out = env * np.cos(om * t + phi) / math.cos(phi)
    elif branch == "critical":
        out = env * (1.0 - p.offset * t)
    else:
        w = abs(p.omega.imag)
        out = env * (np.cosh(w * t) - (p.offset / w) * np.sinh(w * t))
    return out if out.ndim else float(out)


def error_probability(lam):
    return 0.5 * (1.0 - np.asarray(lam))


def tune_B(gamma: float, tau_k: float, period: float, n: int = 1) -> float:
    """Kernel amplitude giving ``omega * period = 2 pi n``."""
    if not period > 0 or n < 1:
        raise ValueError("need period > 0 and n >= 1")
    return math.sqrt((2 * math.pi * n / period) ** 2 + (gamma - 0.5 / tau_k) ** 2)


def revival_times(p: ExpKernelParams, n_max: int) -> np.ndarray:
    """Times ``2 pi n / omega`` and ``(2 pi n - 2 phi) / omega`` for ``n = 1..n_max``.

    At each, ``Lambda(t) = exp(-t/tau)``.
    """
    if p.branch != "real":
        raise NonOscillatory(f"omega = {p.omega} is not real and positive")
    om = p.omega.real
    n = np.arange(1, n_max + 1)
    both = np.concatenate([2 * np.pi * n / om, (2 * np.pi * n - 2 * p.phi) / om])
    both = np.sort(both[both > 0])
    keep = np.concatenate([[True], np.diff(both) > 1e-12 * max(1.0, both[-1])])
    return both[keep]


def effective_gamma_exp(p: ExpKernelParams) -> float:
    """Background rate that reproduces ``Lambda`` at the revival times."""
    return 0.5 * (p.gamma + 0.5 / p.tau_k)


@dataclass(frozen=True)
class ModKernelParams:
    """Modulated kernel ``B^2 exp(-t/tau_k) cos(nu t)`` with ``B`` fixed so all roots share one decay rate."""

    gamma: float
    tau_k: float
    nu: float

    def __post_init__(self):
        if self.gamma < 0 or not self.tau_k > 0 or self.nu < 0:
            raise ValueError("need gamma >= 0, tau_k > 0, nu >= 0")

    @property
    def a(self) -> float:
        return 2 * self.gamma - 1.0 / self.tau_k

    @property
    def B(self) -> float:
        return math.sqrt(2.0 / 9.0 * self.a**2 + 2 * self.nu**2)

    @property
    def inv_tau(self) -> float:
        return (2 * self.gamma + 2.0 / self.tau_k) / 3.0

    @property
    def omega2(self) -> float:
        return 3 * self.nu**2 - self.a**2 / 9.0

    @property
    def omega(self) -> float:
        if self.omega2 <= 0:
            raise ComplexOmega(f"omega^2 = {self.omega2} <= 0")
        return math.sqrt(self.omega2)

    @property
    def c0(self) -> float:
        return (self.a**2 + 9 * self.nu**2) / (9 * self.omega2)

    @property
    def phi(self) -> float:
        # Lambda'(0) = -2 gamma fixes the sign: (1 - c0) tan(phi) = 2a / (3 omega)
        return math.atan2(2 * self.a / (3 * self.omega), 1 - self.c0)

    def roots(self) -> np.ndarray:
        r = -self.inv_tau
        om = self.omega
        return np.array([r, r + 1j * om, r - 1j * om])

    def cubic(self) -> np.ndarray:
        """Coefficients of the pole polynomial of ``Lambda~(s)``."""
        g, a, nu, b2 = self.gamma, 1.0 / self.tau_k, self.nu, self.B**2
        return np.array(
            [1.0, 2 * (g + a), nu**2 + b2 + 4 * g * a + a * a, 2 * g * (a * a + nu**2) + b2 * a]
        )


def lambda_modulated(p: ModKernelParams, t):
    """``exp(-t/tau) [c0 + (1 - c0) cos(omega t + phi) / cos(phi)]``."""
    t = np.asarray(t, dtype=float)
    om = p.omega
    c0 = p.c0
    osc = (1 - c0) * np.cos(om * t) - (2 * p.a / (3 * om)) * np.sin(om * t)
    out = np.exp(-p.inv_tau * t) * (c0 + osc)
    return out if out.ndim else float(out)


def effective_gamma_mod(p: ModKernelParams) -> float:
    return (p.gamma + 1.0 / p.tau_k) / 3.0


@dataclass(frozen=True)
class CPEnvelope:
    branch: str
    turning_ratio: float | None  # |cos(omega t + phi)| / cos(phi) at turning points
    turning_times: tuple[float, ...]
    peak_abs: float  # max |Lambda| over turning points with t > 0
    envelope_decreasing: bool
    is_cp: bool


def cp_envelope_exp(p: ExpKernelParams) -> CPEnvelope:
    """Analytic check that ``|Lambda(t)| <= 1`` for all ``t >= 0``."""
    branch = p.branch
    inv_tau = p.inv_tau
    if branch == "real":
        om = p.omega.real
        tk = p.tau_k
        chi_m = (2 * p.gamma * tk - 1) / (2 * om * tk)
        chi_p = (2 * p.gamma * tk + 1) / (2 * om * tk)
        ratio = math.sqrt((1 + chi_m**2) / (1 + chi_p**2))
        # Lambda' = 0  <=>  tan(omega t + phi) = -1/(omega tau)
        base = math.atan(-inv_tau / om) - p.phi
        times = tuple(float(t) for t in (base + np.arange(-1, 4) * math.pi) / om if t > 1e-12)[:2]
        peak = max(abs(lambda_exp(p, t)) for t in times)
        ok = ratio <= 1 + 1e-12 and peak <= 1 + 1e-12
        return CPEnvelope(branch, ratio, times, peak, True, ok)
    if branch == "critical":
        # Lambda = e^{-t/tau}(1 - offset t); a turning point exists only for offset > 0
        times = ()
        peak = 0.0
        if p.offset > 0:
            tstar = (p.offset + inv_tau) / (inv_tau * p.offset)
            times = (tstar,)
            peak = abs(lambda_exp(p, tstar))
        return CPEnvelope(branch, None, times, peak, True, peak <= 1 + 1e-12)
    w = abs(p.omega.imag)
    # envelope derivative has the sign of 1 - 1/(|omega| tau)^2
    decreasing = w * (1.0 / inv_tau) <= 1 + 1e-12
    return CPEnvelope(branch, None, (), 0.0, decreasing, decreasing)


def pauli_channel_apply(lam: float, axis: int, n_qubits: int, x: np.ndarray, on=None) -> np.ndarray:
    """``(1 - p) X + p A X A`` with ``p = (1 - lam)/2``.

    ``A = sigma_axis`` on the qubits listed in ``on`` (default: all ``n_qubits``)
    and identity elsewhere.
    """
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    targets = range(n_qubits) if on is None else set(on)
    a = pauli_string([axis if q in targets else 0 for q in range(n_qubits)])
    p = 0.5 * (1.0 - lam)
    x = np.asarray(x, dtype=complex)
    return (1 - p) * x + p * (a @ x @ a)


@dataclass(frozen=True)
class ThermalParams:
    gamma_minus: float
    gamma_plus: float
    gamma_z: float
    tau_k: float

    def __post_init__(self):
        if not self.gamma_minus > 0 or self.gamma_plus < 0:
            raise ValueError("need gamma_minus > 0 and gamma_plus >= 0")

    @property
    def total_rate(self) -> float:
        return self.gamma_minus + self.gamma_plus

    @property
    def x(self) -> float:
        return self.gamma_plus / self.gamma_minus


def thermal_steady_state(x: float) -> np.ndarray:
    """``(|0><0| + x |1><1|) / (1 + x)``."""
    if x < 0:
        raise ValueError("x must be non-negative")
    return np.diag([1.0, x]).astype(complex) / (1 + x)

