import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genmarkov.channels import ExpKernelParams, tune_B
from genmarkov.errors import IllConditioned
from genmarkov.kernel import ExpDecay, ModulatedExp
from genmarkov.rational import (
    PartialFraction,
    PFTerm,
    RationalFn,
    cluster_roots,
    companion_roots,
    partial_fractions,
    pf_eval_time,
    reduce_fraction,
    synthetic_division,
)
from genmarkov.solver import lambda_tilde

B_TUNED = tune_B(1.0, 25.0, 1.0)


def test_companion_roots():
    r = np.sort_complex(companion_roots([1, -3, 2]))
    assert np.allclose(r, [1, 2])
    assert companion_roots([5.0]).size == 0


def test_synthetic_division():
    q, rem = synthetic_division([1, -3, 2], 1.0)
    assert np.allclose(q, [1, -2]) and abs(rem) < 1e-15


def test_reduce_fraction_cancels_common_factor():
    # (s+1)(s+2) / ((s+1)(s+2)(s+3))
    r = reduce_fraction(RationalFn(np.poly([-1, -2]), np.poly([-1, -2, -3])))
    assert np.allclose(r.num, [1]) and np.allclose(r.den, [1, 3])


def test_reduce_fraction_complex_pair_stays_real():
    quad = np.poly([-1 + 2j, -1 - 2j]).real
    r = reduce_fraction(RationalFn(np.polymul(quad, [1, 5]), np.polymul(quad, [1, 2, 7])))
    assert r.is_real
    assert np.allclose(r.num, [1, 5]) and np.allclose(r.den, [1, 2, 7])


def test_lambda_tilde_exponential_kernel():
    # L1 eigenvalue -1 on the decaying block: 1/(s + 2 gamma + B^2/(s + 1/tau_k))
    g, b, tk = 1.0, 2.0, 4.0
    r = lambda_tilde(-2 * g, -1.0, ExpDecay(b, tk))
    assert np.allclose(r.num, [1, 1 / tk])
    assert np.allclose(r.den, np.polyadd(np.polymul([1, 1 / tk], [1, 2 * g]), [b * b]))


def test_lambda_tilde_background_only():
    r = lambda_tilde(-3.0, 0.0, ExpDecay(2.0, 1.0))
    assert np.allclose(r.num, [1]) and np.allclose(r.den, [1, 3])
    r0 = lambda_tilde(0.0, 0.0, ModulatedExp(1.0, 1.0, 1.0))
    assert np.allclose(r0.num, [1]) and np.allclose(r0.den, [1, 0])


def test_tuned_roots_and_residues():
    r = lambda_tilde(-2.0, -1.0, ExpDecay(B_TUNED, 25.0))
    pf = partial_fractions(r)
    roots = np.sort_complex(pf.roots)
    assert np.allclose(roots, [-1.02 - 2j * math.pi, -1.02 + 2j * math.pi], atol=1e-12)
    for s in roots:
        assert abs(np.polyval(r.den, s)) < 1e-9
    tk, tau0, om = 25.0, 0.5, 2 * math.pi
    c_plus = 0.5 * (1 + 1j * (tk / tau0 - 1) / (2 * om * tk))
    upper = [t for t in pf.terms if t.root.imag > 0][0]
    lower = [t for t in pf.terms if t.root.imag < 0][0]
    assert abs(upper.coeffs[0] - c_plus) < 1e-12
    assert abs(lower.coeffs[0] - c_plus.conjugate()) < 1e-12


def test_double_pole():
    pf = partial_fractions(RationalFn(np.array([1.0]), np.array([1.0, 2.0, 1.0])))
    assert len(pf.terms) == 1
    (term,) = pf.terms
    assert abs(term.root + 1) < 1e-7
    assert np.allclose(term.coeffs, [0, 1], atol=1e-7)
    t = np.linspace(0, 4, 9)
    assert np.allclose(pf_eval_time(pf, t).real, t * np.exp(-t), atol=1e-7)


def test_triple_pole_with_numerator():
    # (s^2 + 1) / (s + 2)^3 = 1/(s+2) - 4/(s+2)^2 + 5/(s+2)^3
    r = RationalFn(np.array([1.0, 0.0, 1.0]), np.poly([-2, -2, -2]))
    pf = partial_fractions(r, tol=1e-4)
    (term,) = pf.terms
    assert np.allclose(term.coeffs, [1, -4, 5], atol=1e-6)


def test_ambiguous_cluster_raises():
    with pytest.raises(IllConditioned):
        cluster_roots([1.0, 1.0 + 5e-7], tol=1e-7)
    assert cluster_roots([1.0, 1.0 + 5e-8], tol=1e-7)[0][1] == 2
    assert len(cluster_roots([1.0, 1.0 + 1e-5], tol=1e-7)) == 2


def test_pf_eval_single_pole():
    lam = -0.7 + 0.3j
    pf = PartialFraction((PFTerm(lam, (1.0,)),))
    assert abs(pf_eval_time(pf, 1.3) - np.exp(lam * 1.3)) < 1e-15


def test_tuned_decay_values():
    pf = partial_fractions(lambda_tilde(-2.0, -1.0, ExpDecay(B_TUNED, 25.0)))
    assert abs(pf_eval_time(pf, 0.0) - 1) < 1e-10
    val = pf_eval_time(pf, 1.0)
    assert abs(val.imag) < 1e-10
    assert abs(val.real - math.exp(-1.02)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(
    lam=st.floats(-5, 0),
    mu=st.floats(-3, 0),
    b=st.floats(0, 5),
    tk=st.floats(0.1, 20),
    nu=st.floats(0, 6),
    modulated=st.booleans(),
)
def test_reconstruction_and_initial_value(lam, mu, b, tk, nu, modulated):
    k = ModulatedExp(b, tk, nu) if modulated else ExpDecay(b, tk)
    r = lambda_tilde(lam, mu, k)
    try:
        pf = partial_fractions(r)
    except IllConditioned:
        return  # near-degenerate roots are reported, not expanded
    assert abs(pf_eval_time(pf, 0.0) - 1) < 1e-10
    assert abs(pf_eval_time(pf, 0.5).imag) < 1e-10
    rng = np.random.default_rng(0)
    s = rng.normal(size=20) * 3 + 1j * rng.normal(size=20) * 3 + 1.0
    want = r(s)
    got = pf(s)
    assert np.all(np.abs(got - want) <= 1e-9 * np.maximum(1, np.abs(want)))


def test_tuned_matches_closed_form_on_grid():
    p = ExpKernelParams(1.0, B_TUNED, 25.0)
    pf = partial_fractions(lambda_tilde(-2.0, -1.0, ExpDecay(B_TUNED, 25.0)))
    t = np.linspace(0, 5, 101)
    om = p.omega.real
    closed = np.exp(-p.inv_tau * t) * np.cos(om * t + p.phi) / math.cos(p.phi)
    assert np.abs(pf_eval_time(pf, t).real - closed).max() < 1e-12
