"""Rational functions in ``s`` and their inverse Laplace transforms.

Polynomials are coefficient arrays with the highest degree first (the
``numpy.polyval`` convention).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import IllConditioned

ROOT_TOL = 1e-7
COMMON_ROOT_TOL = 1e-9


def _trim(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.flatnonzero(np.abs(c) > 0)
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return c[nz[0]:]


def _maybe_real(c: np.ndarray) -> np.ndarray:
    if np.all(c.imag == 0):
        return c.real.astype(float)
    return c


def companion_roots(coeffs) -> np.ndarray:
    """Roots as eigenvalues of the companion matrix of ``coeffs``."""
    c = _trim(coeffs)
    n = len(c) - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    c = c / c[0]
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -c[1:]
    comp[1:, :-1] = np.eye(n - 1)
    return np.linalg.eigvals(comp)


def synthetic_division(coeffs, root: complex) -> tuple[np.ndarray, complex]:
    """Divide by ``(s - root)``; returns (quotient, remainder)."""
    c = np.asarray(coeffs, dtype=complex)
    out = np.empty(len(c) - 1, dtype=complex)
    acc = 0j
    for i, a in enumerate(c[:-1]):
        acc = acc * root + a
        out[i] = acc
    return out, acc * root + c[-1]


def taylor_coefficients(coeffs, root: complex, m: int) -> np.ndarray:
    """First ``m`` coefficients of ``poly(root + u)`` in powers of ``u``."""
    c = np.asarray(coeffs, dtype=complex)
    out = np.zeros(m, dtype=complex)
    for j in range(m):
        if len(c) == 0:
            break
        if len(c) == 1:
            out[j] = c[0]
            break
        c, out[j] = synthetic_division(c, root)
    return out


@dataclass(frozen=True)
class RationalFn:
    """``num(s) / den(s)``."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = _maybe_real(_trim(self.num))
        den = _maybe_real(_trim(self.den))
        if np.all(den == 0):
            raise ZeroDivisionError("zero denominator")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.num) or np.iscomplexobj(self.den))

    @property
    def is_strictly_proper(self) -> bool:
        return len(self.num) < len(self.den) or np.all(self.num == 0)

    def __call__(self, s):
        return np.polyval(self.num, s) / np.polyval(self.den, s)

    def __pow__(self, n: int) -> "RationalFn":
        num = np.array([1.0])
        den = np.array([1.0])
        for _ in range(n):
            num = np.polymul(num, self.num)
            den = np.polymul(den, self.den)
        return RationalFn(num, den)

    def monic(self) -> "RationalFn":
        lead = self.den[0]
        return RationalFn(self.num / lead, self.den / lead)


def reduce_fraction(r: RationalFn, tol: float = COMMON_ROOT_TOL) -> RationalFn:
    """Cancel roots shared by numerator and denominator."""
    num = np.asarray(r.num, dtype=complex)
    den = np.asarray(r.den, dtype=complex)
    real_input = r.is_real
    changed = True
    while changed and len(num) > 1 and len(den) > 1:
        changed = False
        den_scale = np.max(np.abs(den))
        for z in companion_roots(num):
            scale = den_scale * max(1.0, abs(z)) ** (len(den) - 1)
            if abs(np.polyval(den, z)) > tol * scale:
                continue
            if real_input and abs(z.imag) > tol:
                quad = np.array([1.0, -2 * z.real, abs(z) ** 2])
                num, _ = np.polydiv(num, quad)
                den, _ = np.polydiv(den, quad)
            else:
                if real_input:
                    z = complex(z.real, 0.0)
                num, _ = synthetic_division(num, z)
                den, _ = synthetic_division(den, z)
            changed = True
            break
    out = RationalFn(num, den).monic()
    if real_input:
        out = RationalFn(np.real(out.num), np.real(out.den))
    return out


@dataclass(frozen=True)
class PFTerm:
    """``sum_n coeffs[n-1] / (s - root)**n``."""

    root: complex
    coeffs: tuple[complex, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class PartialFraction:
    terms: tuple[PFTerm, ...]

    @property
    def roots(self) -> np.ndarray:
        return np.array([t.root for t in self.terms])

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for term in self.terms:
            for n, c in enumerate(term.coeffs, start=1):
                out = out + c / (s - term.root) ** n
        return out

    def time(self, t):
        return pf_eval_time(self, t)


def cluster_roots(roots, tol: float = ROOT_TOL) -> list[tuple[complex, int]]:
    """Group numerically split roots into (center, multiplicity) pairs.

    Pairs closer than ``tol`` are merged; pairs in ``(tol, 10*tol]`` are
    ambiguous and raise :class:`IllConditioned`.
    """
    roots = np.asarray(roots, dtype=complex)
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            dist = abs(roots[i] - roots[j])
            if dist <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    centers = [(complex(roots[idx].mean()), len(idx)) for idx in groups.values()]
    for a in range(len(centers)):
        for b in range(a + 1, len(centers)):
            dist = abs(centers[a][0] - centers[b][0])
            if dist <= 10 * tol:
                raise IllConditioned(
                    f"roots {centers[a][0]} and {centers[b][0]} are {dist:.2g} apart"
                )
    centers.sort(key=lambda c: (-c[0].real, c[0].imag))
    return centers


def _coefficients(num, den, root: complex, mult: int) -> tuple[complex, ...]:
    # deflate den by (s - root) mult times, then expand num/deflated in Taylor series at root
    q = np.asarray(den, dtype=complex)
    for _ in range(mult):
        q, _ = synthetic_division(q, root)
    a = taylor_coefficients(num, root, mult)
    b = taylor_coefficients(q, root, mult)
    g = np.zeros(mult, dtype=complex)
    for j in range(mult):
        g[j] = (a[j] - np.dot(g[:j], b[j:0:-1])) / b[0]
    # coefficient of (s - root)^{-n} is g[mult - n]
    return tuple(complex(g[mult - n]) for n in range(1, mult + 1))


def partial_fractions_with_roots(r: RationalFn, clusters) -> PartialFraction:
    """Partial fractions given known ``(root, multiplicity)`` pairs of ``r.den``."""
    if not r.is_strictly_proper:
        raise ValueError("partial fractions need deg num < deg den")
    terms = [PFTerm(root, _coefficients(r.num, r.den, root, m)) for root, m in clusters]
    if r.is_real:
        terms = _conjugate_symmetrize(terms)
    return PartialFraction(tuple(terms))


def _conjugate_symmetrize(terms: list[PFTerm], tol: float = ROOT_TOL) -> list[PFTerm]:
    out = list(terms)
    done = set()
    for i, t in enumerate(out):
        if i in done:
            continue
        if abs(t.root.imag) <= tol:
            out[i] = PFTerm(complex(t.root.real, 0.0), tuple(complex(c.real, 0.0) for c in t.coeffs))
            done.add(i)
            continue
        partner = min(
            (j for j in range(len(out)) if j != i and j not in done),
            key=lambda j: abs(out[j].root - t.root.conjugate()),
            default=None,
        )
        if partner is None or abs(out[partner].root - t.root.conjugate()) > 10 * tol:
            continue
        # keep the upper-half-plane member, mirror it
        upper, lower = (i, partner) if t.root.imag > 0 else (partner, i)
        u = out[upper]
        out[lower] = PFTerm(u.root.conjugate(), tuple(c.conjugate() for c in u.coeffs))
        done.update((i, partner))
    return out


def partial_fractions(r: RationalFn, tol: float = ROOT_TOL) -> PartialFraction:
    """Partial-fraction expansion via companion-matrix roots."""
    clusters = cluster_roots(companion_roots(r.den), tol)
    return partial_fractions_with_roots(r, clusters)


def pf_eval_time(pf: PartialFraction, t):
    """Inverse Laplace transform ``sum c_n t^{n-1}/(n-1)! e^{s t}`` at ``t``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for term in pf.terms:
        poly = np.zeros(t.shape, dtype=complex)
        for n, c in enumerate(term.coeffs, start=1):
            poly = poly + c * t ** (n - 1) / factorial(n - 1)
        out = out + poly * np.exp(term.root * t)
    return out if out.ndim else complex(out)
