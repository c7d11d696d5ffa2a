"""Self-verification: cross-solver oracles, spectral algebra and CP scans."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import (
    ExpKernelParams,
    ModKernelParams,
    effective_gamma_exp,
    lambda_exp,
    lambda_modulated,
    revival_times,
    tune_B,
)
from .kernel import ExpDecay, ModulatedExp
from .lindblad import (
    LindbladGenerator,
    ThermalSpectral,
    build_generator,
    dephasing_pair,
    spectral_decompose,
    steady_state_projector,
    thermal_generator,
)
from .metrics import cp_check
from .operators import SIGMA, pure_state
from .solver import (
    assemble_propagator,
    block_rates,
    embedded_propagator,
    embedded_trajectory,
    stochastic_average,
    stochastic_generator,
    volterra_solve,
)

ORACLE_TOL = 1e-9
VOLTERRA_TOL = 1e-4
ALGEBRA_TOL = 1e-8
CP_TOL = 1e-10

# (gamma, B, tau_k): tuned real branch, fig3 setting, imaginary branch, gamma = 0
EXP_CASES = [(1.0, tune_B(1.0, 25.0, 1.0), 25.0), (1.0, 5.0, 5.0), (1.0, 0.2, 5.0), (0.0, 2.0, 3.0)]
# (gamma, tau_k, nu)
MOD_CASES = [(0.5, 25.0, 10.0), (1.0, 25.0, 3.0)]
VOLTERRA_EXP = (1.0, tune_B(1.0, 25.0, 1.0), 25.0)
VOLTERRA_MOD = (1.0, 25.0, 3.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _decay_block_embedded(gamma, kernel, times):
    l0, l1 = dephasing_pair(gamma, 3)
    tr = embedded_trajectory(l0, l1, kernel, SIGMA[1].astype(complex), times)
    return 0.5 * np.einsum("ab,tba->t", SIGMA[1], tr.states).real


def check_analytic_vs_embedded() -> tuple[bool, str]:
    t = np.linspace(0, 5, 101)
    worst = 0.0
    for g, b, tk in EXP_CASES:
        err = np.abs(lambda_exp(ExpKernelParams(g, b, tk), t) - _decay_block_embedded(g, ExpDecay(b, tk), t)).max()
        worst = max(worst, err)
    for g, tk, nu in MOD_CASES:
        p = ModKernelParams(g, tk, nu)
        err = np.abs(lambda_modulated(p, t) - _decay_block_embedded(g, ModulatedExp(p.B, tk, nu), t)).max()
        worst = max(worst, err)
    return worst < ORACLE_TOL, f"max |closed form - embedded| = {worst:.3g}"


def check_laplace_vs_embedded() -> tuple[bool, str]:
    t = np.linspace(0, 5, 26)
    worst = 0.0
    l0, l1 = thermal_generator(1.0, 0.5, 2.0)
    dec = ThermalSpectral(1.0, 0.5).decomposition()
    mu = block_rates(dec, l1)
    k = ExpDecay(1.0, 5.0)
    props = assemble_propagator(dec, mu, k, t)
    for ti, p in zip(t, props):
        worst = max(worst, np.abs(p - embedded_propagator(l0, l1, k, ti)).max())
    return worst < ORACLE_TOL, f"thermal propagator max deviation = {worst:.3g}"


def check_projector_algebra() -> tuple[bool, str]:
    rng = np.random.default_rng(1234)
    gens = [dephasing_pair(1.0, 3)[0], dephasing_pair(0.7, 1, 2)[0], thermal_generator(1.0, 0.5, 0.0)[0]]
    for _ in range(3):
        h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        gens.append(build_generator(LindbladGenerator(hamiltonian=h + h.conj().T, jumps=[(a, 0.8)])))
    worst = 0.0
    for g in gens:
        dec = spectral_decompose(g)
        ps = [b.projector for b in dec.blocks]
        n = g.shape[0]
        worst = max(worst, np.abs(sum(ps) - np.eye(n)).max())
        for i, j in itertools.product(range(len(ps)), repeat=2):
            want = ps[i] if i == j else 0
            worst = max(worst, np.abs(ps[i] @ ps[j] - want).max())
        worst = max(worst, np.abs(g @ steady_state_projector(g)).max())
    return worst < ALGEBRA_TOL, f"max violation = {worst:.3g} over {len(gens)} generators"


def check_thermal_biorthonormality() -> tuple[bool, str]:
    worst = 0.0
    for gm, gp in [(1.0, 0.5), (1.0, 0.0), (2.0, 2.0), (0.3, 1.7)]:
        ts = ThermalSpectral(gm, gp)
        gram = np.array([[np.trace(lo @ r) for r in ts.right] for lo in ts.left])
        worst = max(worst, np.abs(gram - np.eye(4)).max())
    return worst < ALGEBRA_TOL, f"max |Tr[L_i R_j] - delta_ij| = {worst:.3g}"


def check_revival_intersection() -> tuple[bool, str]:
    p = ExpKernelParams(1.0, tune_B(1.0, 25.0, 1.0), 25.0)
    ts = revival_times(p, 4)
    g_eff = effective_gamma_exp(p)
    err = np.abs(lambda_exp(p, ts) - np.exp(-2 * g_eff * ts)).max()
    return err < 1e-6, f"max gap at {len(ts)} revival times = {err:.3g}"


def volterra_errors(kind: str, dts=(1e-3, 5e-4), horizon: float = 5.0) -> list[float]:
    """Max error of the Volterra decay function against the closed form for each ``dt``."""
    if kind == "exp":
        g, b, tk = VOLTERRA_EXP
        k = ExpDecay(b, tk)

        def exact(t):
            return lambda_exp(ExpKernelParams(g, b, tk), t)
    else:
        g, tk, nu = VOLTERRA_MOD
        p = ModKernelParams(g, tk, nu)
        k = ModulatedExp(p.B, tk, nu)

        def exact(t):
            return lambda_modulated(p, t)
    l0, l1 = dephasing_pair(g, 3)
    out = []
    for dt in dts:
        tr = volterra_solve(l0, l1, k, SIGMA[1].astype(complex), dt, horizon)
        lam = 0.5 * np.einsum("ab,tba->t", SIGMA[1], tr.states).real
        out.append(float(np.abs(lam - exact(tr.times)).max()))
    return out


def check_volterra_convergence() -> tuple[bool, str]:
    ok = True
    parts = []
    for kind in ("exp", "modulated"):
        e1, e2 = volterra_errors(kind)
        ratio = e1 / e2
        ok &= e1 < VOLTERRA_TOL and 3 <= ratio <= 5
        parts.append(f"{kind}: err(1e-3)={e1:.3g} ratio={ratio:.3f}")
    return ok, "; ".join(parts)


MC_B, MC_TAU, MC_DT, MC_TRAJ, MC_SEED = 0.3, 1.0, 0.01, 4000, 20240611


def monte_carlo_table(n_traj: int = MC_TRAJ, seed: int = MC_SEED):
    """Columns ``t, mean Re rho01, kernel-equation Re rho01, stderr`` for weak coupling."""
    h = SIGMA[3]
    k = ExpDecay(MC_B, MC_TAU)
    plus = pure_state([1, 1])
    zero = np.zeros((4, 4), dtype=complex)
    tr = stochastic_average(zero, h, k, plus, MC_DT, MC_TAU, n_traj, seed)
    ref = embedded_trajectory(zero, stochastic_generator(h), k, plus, tr.times)
    return np.column_stack([tr.times, tr.coherence().real, ref.coherence().real, tr.stderr])


def check_monte_carlo() -> tuple[bool, str]:
    tab = monte_carlo_table()
    dev = np.abs(tab[:, 1] - tab[:, 2])
    bound = np.maximum(3 * tab[:, 3], 0.02)
    lines = ["t, mc_mean, kernel_me, stderr"]
    for row in tab[:: len(tab) // 5]:
        lines.append(", ".join(f"{v:.6f}" for v in row))
    return bool(np.all(dev < bound)), f"max |mean - kernel ME| = {dev.max():.3g}\n    " + "\n    ".join(lines)


def check_choi_exp_scan(n: int = 6) -> tuple[bool, str]:
    worst = np.inf
    count = 0
    l0_cache = {}
    for g in np.linspace(0, 2, n):
        for b in np.linspace(0, 6, n):
            for tk in np.geomspace(0.1, 25, n):
                if g not in l0_cache:
                    l0_cache[g] = dephasing_pair(g, 3)
                l0, l1 = l0_cache[g]
                for t in (0.5, 2.0, 5.0):
                    rep = cp_check(embedded_propagator(l0, l1, ExpDecay(b, tk), t), CP_TOL)
                    worst = min(worst, rep.min_choi_eigenvalue)
                    count += 1
    return worst >= -CP_TOL, f"min Choi eigenvalue {worst:.3g} over {count} maps"


def check_choi_thermal_scan() -> tuple[bool, str]:
    l0, l1 = thermal_generator(1.0, 0.5, 2.0)
    k = ExpDecay(1.0, 5.0)
    worst = np.inf
    for t in np.linspace(0.05, 10, 200):
        worst = min(worst, cp_check(embedded_propagator(l0, l1, k, t), CP_TOL).min_choi_eigenvalue)
    return worst >= -CP_TOL, f"min Choi eigenvalue {worst:.3g} on t in (0, 10]"


FAST_CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "analytic-vs-embedded": check_analytic_vs_embedded,
    "laplace-vs-embedded": check_laplace_vs_embedded,
    "projector-algebra": check_projector_algebra,
    "thermal-biorthonormality": check_thermal_biorthonormality,
    "revival-intersection": check_revival_intersection,
}
FULL_CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    **FAST_CHECKS,
    "volterra-convergence": check_volterra_convergence,
    "monte-carlo-weak-coupling": check_monte_carlo,
    "choi-scan-exponential": check_choi_exp_scan,
    "choi-scan-thermal": check_choi_thermal_scan,
}


def run_checks(level: str = "fast") -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    checks = FAST_CHECKS if level == "fast" else FULL_CHECKS
    results = []
    for name, fn in checks.items():
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.seconds:.2f}s): {r.detail}")
    failed = [r.name for r in results if not r.passed]
    lines.append("all checks passed" if not failed else "failed: " + ", ".join(failed))
    return "\n".join(lines)
