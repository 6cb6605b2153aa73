"""Randomized property suites behind ``fmm-bounds verify``.

Each suite returns a :class:`CheckResult` holding the worst observed
discrepancy and the tolerance it was judged against. The quick level uses
fewer random cases; the full level uses the acceptance-scale counts and adds
the exhaustive binomial inequality sweep.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds
from . import special_functions as sf
from .expansions import (
    CoefficientTable,
    Expansion,
    eval_expansion,
    lebesgue_constant,
    multipole_from_function,
    s2l,
    s2m,
)
from .sphere_quadrature import sphere_rule
from .translations import l2l, m2l, reexpand_via_quadrature


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    cases: int
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: worst={self.worst:.3e} tol={self.tolerance:.10g} "
                f"cases={self.cases} ({self.seconds:.2f}s)")


def _unit(rng, count=None):
    v = rng.standard_normal((count, 3) if count else 3)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _in_ball(rng, center, radius, count):
    return center + radius * np.cbrt(rng.random((count, 1))) * _unit(rng, count)


def _rel_scaled_diff(a: Expansion, b: Expansion, rho: float) -> float:
    """max |a_n - b_n| rho^n / max |b_n| rho^n over the coefficients."""
    n, _ = sf.index_arrays(b.order)
    scale = rho ** n.astype(float)
    ref = np.abs(b.coeffs.data) * scale
    return float(np.max(np.abs(a.coeffs.data - b.coeffs.data) * scale) / np.max(ref))


# {{{ special-function suites

def check_addition_theorem(count: int, rng, max_degree: int = 20, tol: float = 1e-11):
    """P_n(xi . eta) against (4 pi / (2n+1)) sum_m Y_n^m(xi) conj(Y_n^m(eta))."""
    xi, eta = _unit(rng, count), _unit(rng, count)
    n = rng.integers(0, max_degree + 1, count)
    y_xi = sf.sph_harm_table(max_degree, xi)
    y_eta = sf.sph_harm_table(max_degree, eta)
    deg, _ = sf.index_arrays(max_degree)
    worst = 0.0
    for k in range(count):
        sel = deg == n[k]
        rhs = 4 * np.pi / (2 * n[k] + 1) * np.sum(y_xi[k, sel] * np.conj(y_eta[k, sel]))
        lhs = sf.legendre_p(int(n[k]), float(np.clip(xi[k] @ eta[k], -1, 1)))
        worst = max(worst, abs(lhs - rhs))
    return "addition theorem", worst, tol, count


def check_norm_corollary(count: int, rng, max_degree: int = 30, tol: float = 1e-11):
    """sum_m |Y_n^m(xi)|^2 = (2n+1)/(4 pi) for every n <= max_degree."""
    xi = _unit(rng, count)
    y = sf.sph_harm_table(max_degree, xi)
    deg, _ = sf.index_arrays(max_degree)
    sums = np.stack([np.sum(np.abs(y[:, deg == n]) ** 2, axis=1)
                     for n in range(max_degree + 1)], axis=1)
    expected = (2 * np.arange(max_degree + 1) + 1) / (4 * np.pi)
    return "sum-of-squares corollary", float(np.max(np.abs(sums - expected))), tol, count


def check_binomial_lemma(max_n: int = 60):
    """Both product inequalities for all 0 <= n, m, k <= max_n under their hypotheses.

    Integer arithmetic makes this exact; ``worst`` is the largest relative
    excess of the left side over the right side (zero when the lemma holds).
    """
    comb = math.comb
    worst, cases = 0.0, 0
    for n in range(max_n + 1):
        for m in range(max_n + 1):
            rhs = comb(n, m) ** 2
            for k in range(max_n + 1):
                if n >= k:
                    lhs = comb(n + k, m) * comb(n - k, m)
                    cases += 1
                    if lhs > rhs:
                        worst = max(worst, float(lhs - rhs) / max(rhs, 1))
                if m >= k:
                    lhs = comb(n, m + k) * comb(n, m - k)
                    cases += 1
                    if lhs > rhs:
                        worst = max(worst, float(lhs - rhs) / max(rhs, 1))
    return "binomial product lemma", worst, 0.0, cases

# }}}


# {{{ translation suites

def check_l2l_idempotence(count: int, rng, max_order: int = 12, tol: float = 1e-10):
    """l2l(l2l(e, c1, q), c2, q') against l2l(e, c2, q) for e.order <= q <= q'."""
    worst = 0.0
    for _ in range(count):
        p = int(rng.integers(0, max_order + 1))
        q = int(rng.integers(p, max_order + 1))
        q2 = int(rng.integers(q, max_order + 5))
        src = rng.uniform(2, 4) * _unit(rng)
        e = s2l(src, 1.0, np.zeros(3), p, radius=1.0)
        c1 = _in_ball(rng, np.zeros(3), 0.4, 1)[0]
        c2 = c1 + _in_ball(rng, np.zeros(3), 0.4, 1)[0]
        chained = l2l(l2l(e, c1, q), c2, q2)
        direct = l2l(e, c2, q)
        rho = min(chained.radius, direct.radius)
        pts = _in_ball(rng, c2, rho, 16)
        a, b = eval_expansion(chained, pts), eval_expansion(direct, pts)
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    return "l2l idempotence", worst, tol, count


def check_multipole_truncation(count: int, rng, max_order: int = 12, tol: float = 1e-11):
    """M_{c'}^{p'}[M_c^p[phi_s]] = M_{c'}^{p'}[phi_s] for p' <= p.

    The left side is formed by sphere quadrature of the truncated multipole
    field; the right side is the closed-form multipole of the source.
    """
    worst = 0.0
    for _ in range(count):
        p = int(rng.integers(0, max_order + 1))
        p2 = int(rng.integers(0, p + 1))
        rho = rng.uniform(0.5, 1.0)
        s = _in_ball(rng, np.zeros(3), rho, 1)[0]
        e = s2m(s, 1.0, np.zeros(3), p, radius=rho)
        c2 = _in_ball(rng, np.zeros(3), 0.5, 1)[0]
        rho2 = (rho + np.linalg.norm(c2)) * rng.uniform(1.2, 1.6)
        lhs = multipole_from_function(lambda x: eval_expansion(e, x), c2, rho2, p2)
        rhs = s2m(s, 1.0, c2, p2, radius=rho2)
        worst = max(worst, _rel_scaled_diff(lhs, rhs, 1.0 / rho2))
    return "multipole truncation identity", worst, tol, count


def check_oracle_equivalence(count: int, rng, max_order: int = 12, tol: float = 1e-10):
    """l2l and m2l against sphere-quadrature re-expansion, coefficients scaled by rho^n."""
    worst = 0.0
    for k in range(count):
        p = int(rng.integers(0, max_order + 1))
        q = int(rng.integers(0, max_order + 1))
        if k % 2 == 0:
            e = s2l(rng.uniform(1.5, 3) * _unit(rng), 1.0, np.zeros(3), p, radius=1.0)
            c = _in_ball(rng, np.zeros(3), 0.7, 1)[0]
            radius = (1.0 - np.linalg.norm(c)) * rng.uniform(0.3, 1.0)
            fast = l2l(e, c, q, radius=radius)
        else:
            e = s2m(_in_ball(rng, np.zeros(3), 0.5, 1)[0], 1.0, np.zeros(3), p, radius=0.5)
            c = rng.uniform(1.5, 3.0) * _unit(rng)
            radius = (np.linalg.norm(c) - 0.5) * rng.uniform(0.2, 0.7)
            fast = m2l(e, c, q, radius=radius)
        slow = reexpand_via_quadrature(e, c, radius, q)
        worst = max(worst, _rel_scaled_diff(fast, slow, radius))
    return "translation oracle equivalence", worst, tol, count

# }}}


# {{{ bound suites

def _pure(kind: str, n: int, radius: float) -> Expansion:
    data = np.zeros(sf.table_size(n), dtype=complex)
    data[sf.packed_index(n, 0)] = 1.0
    return Expansion(kind, np.zeros(3), n, radius, CoefficientTable(n, data))


def local_of_regular(n: int, p: int, c, t) -> complex:
    """L_c^p[R_n^0](t) via l2l of the single-coefficient expansion."""
    c, t = sf.as_vec3(c), sf.as_vec3(t)
    reach = np.linalg.norm(c) + np.linalg.norm(t - c)
    e = _pure("local", n, 2 * reach + 1.0)
    return eval_expansion(l2l(e, c, p, radius=np.linalg.norm(t - c) or None), t)


def local_of_irregular(n: int, p: int, c, t) -> complex:
    """L_c^p[I_n^0](t) via m2l of the single-coefficient expansion."""
    c, t = sf.as_vec3(c), sf.as_vec3(t)
    gap = np.linalg.norm(c) - np.linalg.norm(t - c)
    e = _pure("multipole", n, 0.5 * gap)
    rad = np.linalg.norm(t - c)
    return eval_expansion(m2l(e, c, p, radius=rad if rad > 0 else None), t)


def check_lemma_regular(count: int, rng, max_n: int = 20, slack: float = 1e-9):
    worst = 0.0
    for _ in range(count):
        n, p = (int(v) for v in rng.integers(0, max_n + 1, 2))
        c = rng.uniform(0, 1.5) * _unit(rng)
        t = c + rng.uniform(0, 1.5) * _unit(rng)
        ratio = abs(local_of_regular(n, p, c, t)) / bounds.bound_local_of_regular(n, c, t)
        worst = max(worst, ratio)
    return "regular-harmonic local bound", worst, 1 + slack, count


def check_lemma_irregular(count: int, rng, max_n: int = 20, slack: float = 1e-9):
    worst = 0.0
    for _ in range(count):
        n, p = (int(v) for v in rng.integers(0, max_n + 1, 2))
        c = rng.uniform(0.5, 2.0) * _unit(rng)
        t = c + rng.uniform(0, 0.95) * np.linalg.norm(c) * _unit(rng)
        ratio = abs(local_of_irregular(n, p, c, t)) / bounds.bound_local_of_irregular(n, c, t)
        worst = max(worst, ratio)
    return "irregular-harmonic local bound", worst, 1 + slack, count


def projection_sample_points(center, radius, rng, interior: int = 512) -> np.ndarray:
    """Degree-40 sphere rule on the boundary, random interior points and the center."""
    rule = sphere_rule(40)
    return np.concatenate([center + radius * rule.nodes,
                           _in_ball(rng, center, radius, interior), center[None, :]])


def check_projection_bound(count: int, rng, max_order: int = 15, slack: float = 1e-6):
    """sup |L_q[phi] - L_q[phi~]| <= Lambda_q sup |phi - phi~| on sampled points.

    phi is a point-source potential and phi~ adds a small harmonic
    perturbation made of a second source and a random polynomial.
    """
    worst = 0.0
    lam = {}
    center, radius = np.zeros(3), 1.0
    for _ in range(count):
        q = int(rng.integers(0, max_order + 1))
        lam.setdefault(q, lebesgue_constant(q))
        eps = 10.0 ** rng.uniform(-6, -1)
        s2 = rng.uniform(1.3, 3.0) * _unit(rng)
        deg = int(rng.integers(0, 25))
        poly = rng.standard_normal(sf.table_size(deg)) + 1j * rng.standard_normal(sf.table_size(deg))
        poly_table = CoefficientTable(deg, poly)
        pts = projection_sample_points(center, radius, rng)
        poly = Expansion("local", center, deg, radius, poly_table)
        poly_q = Expansion("local", center, q, radius, poly_table.with_order(q))
        # phi - phi~ and its q-th order local expansion
        diff = eps * (1.0 / np.linalg.norm(pts - s2, axis=1) + eval_expansion(poly, pts))
        diff_q = eps * (eval_expansion(s2l(s2, 1.0, center, q, radius=radius), pts)
                        + eval_expansion(poly_q, pts))
        sup_diff = np.max(np.abs(diff))
        sup_proj = np.max(np.abs(diff_q))
        worst = max(worst, sup_proj / (lam[q] * sup_diff))
    return "Fourier-Laplace projection bound", worst, 1 + slack, count


def check_chain_bounds(count: int, rng, max_order: int = 20, slack: float = 1.02):
    """Measured chain errors never exceed the closed-form bounds beyond ``slack``."""
    from . import experiments

    worst = 0.0
    for k in range(count):
        chain = experiments.CHAINS[k % 3]
        p, q = (int(v) for v in rng.integers(0, max_order + 1, 2))
        sample = experiments.sample_scenario(chain, rng)
        bound = experiments.chain_bound(sample, p)
        worst = max(worst, experiments.measure_error(sample, p, q) / bound)
    return "translation chain bounds", worst, slack, count


def check_lebesgue(tol: float = 1e-7):
    worst = max(abs(lebesgue_constant(0) - 1.0), abs(lebesgue_constant(1) - 5.0 / 3.0))
    return "Lebesgue constants p=0,1", worst, tol, 2

# }}}


def _run(fn: Callable, *args, **kw) -> CheckResult:
    start = time.perf_counter()
    name, worst, tol, cases = fn(*args, **kw)
    passed = bool(worst <= tol) if tol > 0 else bool(worst == 0)
    return CheckResult(name, passed, float(worst), float(tol), int(cases),
                       time.perf_counter() - start)


LEVELS = {
    "quick": dict(addition=200, norm=50, binom=20, idem=20, trunc=10, oracle=10,
                  lemma=40, projection=10, chains=300),
    "full": dict(addition=1000, norm=200, binom=60, idem=100, trunc=100, oracle=100,
                 lemma=200, projection=50, chains=3000),
}


def run_suite(level: str = "quick", seed: int = 0) -> list[CheckResult]:
    """Run every property suite at ``level``; deterministic for a given seed."""
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; expected one of {sorted(LEVELS)}")
    n = LEVELS[level]
    ss = np.random.SeedSequence(seed).spawn(10)
    rngs = [np.random.default_rng(s) for s in ss]
    return [
        _run(check_addition_theorem, n["addition"], rngs[0]),
        _run(check_norm_corollary, n["norm"], rngs[1]),
        _run(check_binomial_lemma, n["binom"]),
        _run(check_l2l_idempotence, n["idem"], rngs[2]),
        _run(check_multipole_truncation, n["trunc"], rngs[3]),
        _run(check_oracle_equivalence, n["oracle"], rngs[4]),
        _run(check_lemma_regular, n["lemma"], rngs[5]),
        _run(check_lemma_irregular, n["lemma"], rngs[6]),
        _run(check_projection_bound, n["projection"], rngs[7]),
        _run(check_chain_bounds, n["chains"], rngs[8]),
        _run(check_lebesgue),
    ]
