"""Figure-style experiments: resolved configuration in, rectangular table out."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channels import (
    ExpKernelParams,
    ModKernelParams,
    effective_gamma_exp,
    effective_gamma_mod,
    lambda_exp,
    lambda_modulated,
    pauli_channel_apply,
    tune_B,
)
from .kernel import ExpDecay, ModulatedExp
from .lindblad import (
    SpectralBlock,
    SpectralDecomposition,
    ThermalSpectral,
    dephasing_pair,
    evolve_markov,
    steady_state_projector,
    thermal_generator,
)
from .metrics import concurrence, op_distance
from .operators import SIGMA, devectorize, pauli_string, pure_state, sandwich_superop, vectorize
from .solver import (
    assemble_propagator,
    block_rates,
    embedded_trajectory,
    stochastic_average,
    volterra_solve,
)

EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "fig5", "custom")
SOLVERS = ("analytic", "laplace", "embedded", "volterra", "stochastic")

DEFAULTS = {
    "fig1": {"gamma": 1.0, "tau_k": 25.0, "B": "tuned(1,1)", "axis": 3, "t_max": 5.0, "points": 501, "solver": "analytic"},
    "fig2": {"gamma": 1.0, "tau_k": 25.0, "B": "tuned(1,1)", "axis": 1, "T": 1.0, "grid": 64, "solver": "analytic"},
    "fig3": {"gamma": 1.0, "tau_k": 5.0, "B": 5.0, "axis": 3, "t_max": 5.0, "points": 101, "solver": "analytic"},
    "fig4": {"gamma": 0.5, "tau_k": 25.0, "nu": 10.0, "axis": 3, "t_max": 5.0, "points": 1001, "solver": "analytic"},
    "fig5": {
        "gamma_minus": 1.0,
        "gamma_plus": 0.5,
        "gamma_z": 2.0,
        "tau_k": 5.0,
        "B": 1.0,
        "t_max": 10.0,
        "points": 201,
        "solver": "laplace",
    },
    "custom": {
        "model": "dephasing",
        "kernel": "exp",
        "gamma": 1.0,
        "tau_k": 1.0,
        "B": 1.0,
        "nu": 0.0,
        "axis": 3,
        "n_qubits": 1,
        "t_max": 5.0,
        "points": 101,
        "solver": "embedded",
        "seed": 0,
        "n_traj": 1000,
        "dt": 0.001,
    },
}

ALLOWED_SOLVERS = {
    "fig1": ("analytic", "laplace", "embedded", "volterra"),
    "fig2": ("analytic", "laplace", "embedded", "volterra"),
    "fig3": ("analytic", "laplace", "embedded", "volterra"),
    "fig4": ("analytic", "laplace", "embedded", "volterra"),
    "fig5": ("laplace", "embedded", "volterra"),
    "custom": SOLVERS,
}

_TUNED = re.compile(r"^\s*tuned\(\s*(\d+)\s*,\s*([0-9.eE+-]+)\s*\)\s*$")


class ConfigError(ValueError):
    """Configuration is well-formed JSON but semantically invalid."""


@dataclass
class ResultTable:
    columns: list[str]
    rows: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.columns):
            raise ValueError("table is not rectangular")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def to_csv(self, config: dict) -> str:
        echo = {k: v for k, v in config.items() if k != "output"}
        lines = [f"# genmarkov {__version__}", "# config " + json.dumps(echo, sort_keys=True)]
        lines += [f"# {k} = {v:.17g}" for k, v in self.meta.items()]
        lines.append(",".join(self.columns))
        lines += [",".join("%.17g" % v for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def resolve_B(value, gamma: float, tau_k: float) -> float:
    """Number, or ``"tuned(n,T)"`` meaning ``omega T = 2 pi n``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    m = _TUNED.match(str(value))
    if not m:
        raise ConfigError(f"B must be a number or 'tuned(n,T)', got {value!r}")
    n, period = int(m.group(1)), float(m.group(2))
    if n < 1 or not period > 0:
        raise ConfigError("tuned(n,T) needs n >= 1 and T > 0")
    return tune_B(gamma, tau_k, period, n)


def resolve(config: dict) -> dict:
    """Merge experiment defaults under ``config`` and check cross-key constraints."""
    exp = config.get("experiment", "fig1")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}")
    out = dict(DEFAULTS[exp])
    out.update(config)
    out["experiment"] = exp
    if out["solver"] not in ALLOWED_SOLVERS[exp]:
        raise ConfigError(f"solver {out['solver']!r} is not available for {exp}")
    if exp == "fig4" and "B" in config:
        raise ConfigError("fig4 fixes B from gamma, tau_k and nu; remove the B key")
    if exp == "custom":
        if out["model"] == "thermal":
            out.setdefault("gamma_minus", 1.0)
            out.setdefault("gamma_plus", 0.5)
            out.setdefault("gamma_z", 2.0)
        if out["solver"] == "stochastic" and out["kernel"] != "exp":
            raise ConfigError("the stochastic solver needs the exponential kernel")
        if out["solver"] == "analytic" and out["model"] != "dephasing":
            raise ConfigError("the analytic solver covers the dephasing model only")
        if out["solver"] == "analytic" and out["kernel"] == "modulated" and "B" in config:
            raise ConfigError("the analytic modulated solution fixes B; remove the B key")
    if "t_max" in out and "points" in out and out["points"] < 2:
        raise ConfigError("need at least two time points")
    return out


def time_grid(cfg: dict) -> np.ndarray:
    return np.linspace(0.0, float(cfg["t_max"]), int(cfg["points"]))


def _probe(axis: int) -> np.ndarray:
    # a Pauli anticommuting with sigma_axis spans the decaying block
    return SIGMA[1] if axis == 3 else SIGMA[3]


def dephasing_decomposition(gamma: float, axis: int, n_qubits: int = 1, on=None) -> SpectralDecomposition:
    """Exact blocks of ``gamma (A X A - X)``: eigenvalue 0 on ``A``-even and ``-2 gamma`` on ``A``-odd operators."""
    targets = range(n_qubits) if on is None else set(on)
    a = pauli_string([axis if q in targets else 0 for q in range(n_qubits)])
    eye = np.eye(4**n_qubits)
    sw = sandwich_superop(a, a)
    even = SpectralBlock(0j, (0.5 * (eye + sw)).astype(complex))
    odd = SpectralBlock(complex(-2 * gamma), (0.5 * (eye - sw)).astype(complex))
    return SpectralDecomposition([even, odd])


def _state_trajectory(l0, l1, kernel, x0, times, solver, dt, decomposition=None):
    """``X(t)`` on ``times`` for a linear memory equation (``X`` need not be a state)."""
    if solver == "embedded":
        return embedded_trajectory(l0, l1, kernel, x0, times).states
    if solver == "laplace":
        mu = block_rates(decomposition, l1)
        props = assemble_propagator(decomposition, mu, kernel, times)
        v = vectorize(x0)
        return np.array([devectorize(p @ v, x0.shape[0]) for p in props])
    if solver == "volterra":
        tr = volterra_solve(l0, l1, kernel, x0, dt, float(times[-1]))
        flat = tr.states.reshape(len(tr.times), -1)
        re = np.array([np.interp(times, tr.times, c) for c in flat.real.T]).T
        im = np.array([np.interp(times, tr.times, c) for c in flat.imag.T]).T
        return (re + 1j * im).reshape(len(times), *x0.shape)
    raise ConfigError(f"solver {solver!r} cannot produce this quantity")


def decay_function(gamma: float, axis: int, kernel, times, solver: str = "analytic", dt: float = 1e-3) -> np.ndarray:
    """``Lambda(t)`` of the single-qubit dephasing channel with a memory kernel."""
    times = np.asarray(times, dtype=float)
    if solver == "analytic":
        if isinstance(kernel, ExpDecay):
            return np.asarray(lambda_exp(ExpKernelParams(gamma, kernel.B, kernel.tau_k), times), dtype=float)
        p = ModKernelParams(gamma, kernel.tau_k, kernel.nu)
        if not math.isclose(p.B, kernel.B, rel_tol=1e-12):
            raise ConfigError("the modulated closed form requires the matched amplitude B")
        return np.asarray(lambda_modulated(p, times), dtype=float)
    l0, l1 = dephasing_pair(gamma, axis)
    q = _probe(axis)
    states = _state_trajectory(l0, l1, kernel, q.astype(complex), times, solver, dt, dephasing_decomposition(gamma, axis))
    return 0.5 * np.einsum("ab,tba->t", q, states).real


def _dephasing_kernel(cfg) -> ExpDecay:
    return ExpDecay(resolve_B(cfg["B"], cfg["gamma"], cfg["tau_k"]), float(cfg["tau_k"]))


def fig1(cfg: dict) -> ResultTable:
    t = time_grid(cfg)
    g = float(cfg["gamma"])
    k = _dephasing_kernel(cfg)
    lam = decay_function(g, cfg["axis"], k, t, cfg["solver"], cfg.get("dt", 1e-3))
    g_eff = effective_gamma_exp(ExpKernelParams(g, k.B, k.tau_k))
    cols = [t, 0.5 * (1 + np.exp(-2 * g * t)), 0.5 * (1 + lam), 0.5 * (1 + np.exp(-2 * g_eff * t))]
    return ResultTable(["t", "f_background", "f_combined", "f_rescaled"], np.column_stack(cols), {"B": k.B, "gamma_eff": g_eff})


def fidelity_gain_grid(p0: float, p: float, axis: int, grid: int):
    """``F - F0`` over a Bloch-angle grid for two Pauli channels along ``axis``.

    For pure input, ``F = 1 - p (1 - <A>^2)``.
    """
    theta = np.linspace(0, np.pi, grid)
    phi = np.linspace(0, 2 * np.pi, grid)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    bloch = {1: np.sin(th) * np.cos(ph), 2: np.sin(th) * np.sin(ph), 3: np.cos(th)}[axis]
    f0 = 1 - p0 * (1 - bloch**2)
    f = 1 - p * (1 - bloch**2)
    return th.ravel(), ph.ravel(), (f - f0).ravel()


def fig2(cfg: dict) -> ResultTable:
    g = float(cfg["gamma"])
    T = float(cfg["T"])
    k = _dephasing_kernel(cfg)
    lam = decay_function(g, cfg["axis"], k, np.array([0.0, T]), cfg["solver"], cfg.get("dt", 1e-3))[-1]
    p0 = 0.5 * (1 - math.exp(-2 * g * T))
    p = 0.5 * (1 - lam)
    th, ph, dF = fidelity_gain_grid(p0, p, cfg["axis"], int(cfg["grid"]))
    return ResultTable(["theta", "phi", "delta_F"], np.column_stack([th, ph, dF]), {"B": k.B, "p0": p0, "p": p})


BELL = pure_state([1, 0, 0, 1])


def bell_concurrence(lam) -> np.ndarray:
    """Concurrence of the Bell state after one-sided dephasing with decay ``lam``."""
    return np.array([concurrence(pauli_channel_apply(float(x), 3, 2, BELL, on=[0])) for x in np.atleast_1d(lam)])


def fig3(cfg: dict) -> ResultTable:
    t = time_grid(cfg)
    g = float(cfg["gamma"])
    k = _dephasing_kernel(cfg)
    lam = decay_function(g, 3, k, t, cfg["solver"], cfg.get("dt", 1e-3))
    cols = [t, bell_concurrence(np.exp(-2 * g * t)), bell_concurrence(lam)]
    return ResultTable(["t", "C_background", "C_combined"], np.column_stack(cols), {"B": k.B})


def fig4(cfg: dict) -> ResultTable:
    t = time_grid(cfg)
    g = float(cfg["gamma"])
    p = ModKernelParams(g, float(cfg["tau_k"]), float(cfg["nu"]))
    k = ModulatedExp(p.B, p.tau_k, p.nu)
    lam = decay_function(g, cfg["axis"], k, t, cfg["solver"], cfg.get("dt", 1e-3))
    g_eff = effective_gamma_mod(p)
    cols = [t, 0.5 * (1 + np.exp(-2 * g * t)), 0.5 * (1 + lam), 0.5 * (1 + np.exp(-2 * g_eff * t))]
    meta = {"B": p.B, "omega": p.omega, "gamma_eff": g_eff}
    return ResultTable(["t", "f_background", "f_combined", "f_rescaled"], np.column_stack(cols), meta)


PLUS = pure_state([1, 1])


def thermal_run(gm, gp, gz, kernel, times, solver="laplace", dt=1e-3, rho0=PLUS):
    """States of the thermal qubit with ``L1 = gz (s3 X s3 - X)`` and memory kernel ``kernel``."""
    l0, l1 = thermal_generator(gm, gp, gz)
    dec = ThermalSpectral(gm, gp).decomposition()
    return _state_trajectory(l0, l1, kernel, np.asarray(rho0, dtype=complex), times, solver, dt, dec)


def fig5(cfg: dict) -> ResultTable:
    t = time_grid(cfg)
    gm, gp, gz = float(cfg["gamma_minus"]), float(cfg["gamma_plus"]), float(cfg["gamma_z"])
    k = ExpDecay(resolve_B(cfg["B"], gm, cfg["tau_k"]), float(cfg["tau_k"]))
    states = thermal_run(gm, gp, gz, k, t, cfg["solver"], cfg.get("dt", 1e-3))
    l0, _ = thermal_generator(gm, gp, 0.0)
    psi = np.array([1, 1]) / math.sqrt(2)
    background = np.array([devectorize(evolve_markov(l0, x) @ vectorize(PLUS)) for x in t])
    steady = devectorize(steady_state_projector(l0) @ vectorize(PLUS))
    f_bg = np.einsum("a,tab,b->t", psi.conj(), background, psi).real
    f_comb = np.einsum("a,tab,b->t", psi.conj(), states, psi).real
    dist = np.array([op_distance(s, steady) for s in states])
    return ResultTable(["t", "F_background", "F_combined", "dist_to_steady"], np.column_stack([t, f_bg, f_comb, dist]))


def custom(cfg: dict) -> ResultTable:
    t = time_grid(cfg)
    tau_k = float(cfg["tau_k"])
    dt = float(cfg["dt"])
    if cfg["model"] == "thermal":
        gm, gp, gz = float(cfg["gamma_minus"]), float(cfg["gamma_plus"]), float(cfg["gamma_z"])
        l0, l1 = thermal_generator(gm, gp, gz)
        dec = ThermalSpectral(gm, gp).decomposition()
        h = math.sqrt(gz / 2) * SIGMA[3]
        rate = gm
        n = 1
    else:
        g = float(cfg["gamma"])
        n = int(cfg["n_qubits"])
        l0, l1 = dephasing_pair(g, cfg["axis"], n)
        dec = dephasing_decomposition(g, cfg["axis"], n)
        h = 0.5 * pauli_string([cfg["axis"]] * n)
        rate = g
    B = resolve_B(cfg["B"], rate, tau_k) if "B" in cfg else None
    if cfg["kernel"] == "exp":
        k = ExpDecay(B, tau_k)
    else:
        if B is None or cfg["solver"] == "analytic":
            B = ModKernelParams(rate, tau_k, float(cfg["nu"])).B
        k = ModulatedExp(B, tau_k, float(cfg["nu"]))
    psi = np.ones(2**n) / math.sqrt(2**n)
    rho0 = pure_state(psi)
    meta = {"B": k.B}
    if cfg["solver"] == "stochastic":
        tr = stochastic_average(l0, h, k, rho0, dt, float(t[-1]), int(cfg["n_traj"]), int(cfg["seed"]))
        idx = np.clip(np.rint(t / dt).astype(int), 0, len(tr.times) - 1)  # nearest grid step
        states = tr.states[idx]
        extra = {"stderr_re_rho_0n": tr.stderr[idx]}
    elif cfg["solver"] == "analytic":
        lam = decay_function(rate, cfg["axis"], k, t, "analytic")
        a = pauli_string([cfg["axis"]] * n)
        states = np.array([(1 - 0.5 * (1 - x)) * rho0 + 0.5 * (1 - x) * (a @ rho0 @ a) for x in lam])
        extra = {}
    else:
        states = _state_trajectory(l0, l1, k, rho0, t, cfg["solver"], dt, dec)
        extra = {}
    fid = np.einsum("a,tab,b->t", psi.conj(), states, psi).real
    corner = states[:, 0, -1]
    purity = np.einsum("tab,tba->t", states, states).real
    cols = {"t": t, "fidelity": fid, "re_rho_0n": corner.real, "im_rho_0n": corner.imag, "purity": purity}
    cols.update(extra)
    return ResultTable(list(cols), np.column_stack(list(cols.values())), meta)


RUNNERS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "custom": custom}


def run_experiment(cfg: dict) -> ResultTable:
    """Run a resolved configuration (see :func:`resolve`)."""
    return RUNNERS[cfg["experiment"]](cfg)
