import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from genmarkov.channels import ExpKernelParams, error_probability, lambda_exp, tune_B
from genmarkov.errors import DimensionMismatch
from genmarkov.experiments import fidelity_gain_grid
from genmarkov.kernel import ExpDecay
from genmarkov.lindblad import ThermalSpectral, build_generator, dephasing_generator, thermal_generator
from genmarkov.metrics import (
    choi_min_eigenvalues,
    concurrence,
    cp_check,
    fidelity,
    min_channel_fidelity,
    op_distance,
    pure_fidelities,
)
from genmarkov.operators import SIGMA, apply_superop, kron, pure_state, random_state, sandwich_superop
from genmarkov.solver import assemble_propagator, block_rates

TUNED = ExpKernelParams(1.0, tune_B(1.0, 25.0, 1.0), 25.0)
BELL = pure_state([1, 0, 0, 1])


def pauli(p, axis=3, n_qubits=1, on=None):
    a = SIGMA[axis]
    ops = [a if (on is None or q in on) else SIGMA[0] for q in range(n_qubits)]
    big = kron(*ops) if n_qubits > 1 else a
    return (1 - p) * np.eye(4**n_qubits) + p * sandwich_superop(big, big)


def test_fidelity_examples():
    rng = np.random.default_rng(0)
    rho = random_state(2, rng)
    assert abs(fidelity(rho, rho) - 1) < 1e-10
    assert fidelity(pure_state([1, 0]), pure_state([0, 1])) < 1e-12
    plus = pure_state([1, 1])
    for p in (0.0, 0.2, 0.5, 0.9):
        assert abs(fidelity(plus, apply_superop(pauli(p), plus)) - (1 - p)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]))
def test_fidelity_symmetric_and_bounded(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_state(d, rng), random_state(d, rng)
    f = fidelity(a, b)
    assert 0 <= f <= 1
    assert abs(f - fidelity(b, a)) < 1e-10


def test_fidelity_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        fidelity(np.eye(2) / 2, np.eye(4) / 4)


def test_pure_fidelities_match_fidelity():
    rng = np.random.default_rng(2)
    psis = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    psis /= np.linalg.norm(psis, axis=1, keepdims=True)
    phi = pauli(0.3, 1)
    got = pure_fidelities(phi, psis)
    for psi, g in zip(psis, got):
        rho = pure_state(psi)
        assert abs(g - fidelity(rho, apply_superop(phi, rho))) < 1e-10


def test_min_fidelity_identity():
    assert abs(min_channel_fidelity(np.eye(4)).value - 1) < 1e-12


def test_min_fidelity_dephasing():
    lam = math.exp(-2)
    rep = min_channel_fidelity(pauli(error_probability(lam)))
    assert abs(rep.value - 0.5 * (1 + lam)) < 1e-9
    # argmin on the equator: equal populations
    assert abs(rep.argmin_state[0, 0].real - 0.5) < 1e-3
    assert rep.samples >= 64 * 64


def test_min_fidelity_combined():
    lam = lambda_exp(TUNED, 1.0)
    rep = min_channel_fidelity(pauli(error_probability(lam)))
    assert abs(rep.value - 0.68030) < 1e-5


def test_min_fidelity_is_upper_bound_on_samples():
    phi = pauli(0.2, 2)
    rep = min_channel_fidelity(phi, grid=16, refine=0)
    th, ph = np.meshgrid(np.linspace(0, np.pi, 16), np.linspace(0, 2 * np.pi, 16, endpoint=False), indexing="ij")
    psis = np.stack([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)], axis=-1).reshape(-1, 2)
    assert rep.value <= pure_fidelities(phi, psis).min() + 1e-15


def test_min_fidelity_two_qubits():
    # two-sided z-dephasing: minimum over pure states is 1 - p for p <= 1/2
    p = 0.2
    rep = min_channel_fidelity(pauli(p, 3, 2, on=[0]), samples=4096, refine=200)
    assert abs(rep.value - (1 - p)) < 2e-3
    assert rep.value >= 1 - p - 1e-12


def test_min_fidelity_rejects_non_tp():
    with pytest.raises(ValueError):
        min_channel_fidelity(0.5 * np.eye(4))


def test_min_fidelity_monotone_in_p():
    vals = [min_channel_fidelity(pauli(p), grid=32, refine=0).value for p in np.linspace(0, 0.5, 6)]
    assert np.all(np.diff(vals) < 0)


def test_fidelity_gain_nonnegative():
    p0 = 0.5 * (1 - math.exp(-2))
    p = error_probability(lambda_exp(TUNED, 1.0))
    _, _, gain = fidelity_gain_grid(p0, p, 3, 24)
    assert gain.min() >= -1e-12


def test_concurrence_examples():
    assert abs(concurrence(BELL) - 1) < 1e-10
    assert concurrence(pure_state([0, 1, 0, 0])) < 1e-10
    assert concurrence(np.eye(4) / 4) < 1e-10
    for lam in (1.0, 0.6, 0.0, -0.3, -1.0):
        rho = apply_superop(pauli(error_probability(lam), 3, 2, on=[0]), BELL)
        assert abs(concurrence(rho) - abs(lam)) < 1e-10


def test_concurrence_local_unitary_invariance():
    rng = np.random.default_rng(3)
    rho = random_state(4, rng)
    u1 = scipy.linalg.expm(1j * (0.3 * SIGMA[1] + 0.7 * SIGMA[2]))
    u2 = scipy.linalg.expm(1j * (1.1 * SIGMA[3] - 0.2 * SIGMA[1]))
    u = np.kron(u1, u2)
    assert abs(concurrence(u @ rho @ u.conj().T) - concurrence(rho)) < 1e-9


def test_concurrence_dimension():
    with pytest.raises(DimensionMismatch):
        concurrence(np.eye(2) / 2)


def test_cp_check_pauli():
    rep = cp_check(pauli(0.3))
    assert rep.is_cp and rep.is_tp
    bad = cp_check(pauli(1.2))
    assert bad.min_choi_eigenvalue < 0 and not bad.is_cp
    assert bad.is_cp == (bad.min_choi_eigenvalue >= -bad.tol)


def test_cp_check_tp_detection():
    assert not cp_check(0.5 * np.eye(4)).is_tp
    amp = np.zeros((4, 4))
    amp[0, 0] = 1.0  # projects onto |0><0| entry only
    assert not cp_check(amp).is_tp


def test_cp_check_non_hermiticity_preserving():
    m = np.zeros((4, 4), dtype=complex)
    m[1, 0] = 1j
    with pytest.raises(ValueError):
        cp_check(m)


def test_cp_check_thermal_propagator():
    l0, l1 = thermal_generator(1.0, 0.5, 2.0)
    dec = ThermalSpectral(1.0, 0.5).decomposition()
    mu = block_rates(dec, l1)
    for t in (0.5, 1.0, 2.0, 5.0):
        rep = cp_check(assemble_propagator(dec, mu, ExpDecay(1.0, 5.0), t))
        assert rep.is_cp and rep.is_tp


def test_cp_check_lindblad_semigroup():
    gen = build_generator(dephasing_generator(0.8, 1, 2))
    for t in (0.1, 1.0, 10.0):
        rep = cp_check(scipy.linalg.expm(t * gen))
        assert rep.is_cp and rep.is_tp


def test_choi_min_eigenvalues_batched():
    stack = np.array([pauli(p) for p in (0.0, 0.3, 1.2)])
    got = choi_min_eigenvalues(stack)
    want = [cp_check(s).min_choi_eigenvalue for s in stack]
    assert np.allclose(got, want, atol=1e-12)
    assert abs(got[2] - (-0.4)) < 1e-12


def test_op_distance():
    a = np.arange(4.0).reshape(2, 2)
    assert op_distance(a, a) == 0
    assert abs(op_distance(SIGMA[3], np.zeros((2, 2))) - 1) < 1e-15
    with pytest.raises(DimensionMismatch):
        op_distance(np.eye(2), np.eye(3))
