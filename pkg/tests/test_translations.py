import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fmm_accel_bounds import special_functions as sf
from fmm_accel_bounds import translations as tr
from fmm_accel_bounds.expansions import (
    CoefficientTable,
    Expansion,
    GeometryError,
    eval_expansion,
    s2l,
    s2m,
)


def _unit(rng, count=None):
    v = rng.standard_normal((count, 3) if count else 3)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _scaled_close(a, b, rho, rtol):
    n = sf.index_arrays(b.order)[0]
    sa, sb = a.coeffs.data * rho**n, b.coeffs.data * rho**n
    assert np.max(np.abs(sa - sb)) <= rtol * np.max(np.abs(sb))


# {{{ plan construction against a per-term loop

def _l2l_loop(p, q):
    factor = np.zeros((sf.table_size(q), sf.table_size(p)))
    basis = np.zeros(factor.shape, dtype=int)
    for nu in range(q + 1):
        for mu in range(-nu, nu + 1):
            for n in range(nu, p + 1):
                k = n - nu
                for m in range(max(-n, mu - k), min(n, mu + k) + 1):
                    i, j = sf.packed_index(nu, mu), sf.packed_index(n, m)
                    basis[i, j] = sf.packed_index(k, m - mu)
                    factor[i, j] = (sf.norm_const_a(n, m) * sf.binom(n + m, nu + mu)
                                    / (sf.norm_const_a(k, m - mu) * sf.norm_const_a(nu, mu)))
    return factor, basis


def _m2l_loop(p, q):
    factor = np.zeros((sf.table_size(q), sf.table_size(p)))
    basis = np.zeros(factor.shape, dtype=int)
    for nu in range(q + 1):
        for mo in range(-nu, nu + 1):
            for n in range(p + 1):
                for m in range(-n, n + 1):
                    mu = m - mo
                    i, j = sf.packed_index(nu, mo), sf.packed_index(n, m)
                    basis[i, j] = sf.packed_index(n + nu, mu)
                    factor[i, j] = ((-1) ** (nu - m - mu) * sf.norm_const_a(n, m)
                                    * sf.binom(n + nu - mu, n - m)
                                    / (sf.norm_const_a(n + nu, mu) * sf.norm_const_a(nu, mo)))
    return factor, basis


@pytest.mark.parametrize("p,q", [(0, 0), (3, 5), (7, 2), (10, 10)])
def test_plans_match_term_loop(p, q):
    for loop, fast in ((_l2l_loop, tr._l2l_plan), (_m2l_loop, tr._m2l_plan)):
        f_ref, b_ref = loop(p, q)
        f, b = fast(p, q)
        np.testing.assert_allclose(f, f_ref, rtol=1e-14, atol=0)
        mask = f_ref != 0
        np.testing.assert_array_equal(b[mask], b_ref[mask])

# }}}


# {{{ l2l

def test_l2l_identity_shift():
    e = s2l([1.0, 2.0, -2.0], 1.0, [0.1, 0.0, 0.0], 7)
    out = tr.l2l(e, e.center, 7)
    np.testing.assert_allclose(out.coeffs.data, e.coeffs.data, rtol=1e-14, atol=1e-17)
    assert out.radius == e.radius


def test_l2l_preserves_polynomial_for_higher_order():
    rng = np.random.default_rng(0)
    e = s2l(3 * _unit(rng), 1.0, np.zeros(3), 6, radius=1.0)
    c = 0.3 * _unit(rng)
    out = tr.l2l(e, c, 9)
    pts = c + 0.5 * out.radius * _unit(rng, 30)
    np.testing.assert_allclose(eval_expansion(out, pts), eval_expansion(e, pts), atol=1e-11)


def test_l2l_default_radius_and_errors():
    e = s2l([0, 0, 5.0], 1.0, np.zeros(3), 4, radius=2.0)
    assert tr.l2l(e, [0.5, 0, 0], 4).radius == pytest.approx(1.5)
    with pytest.raises(GeometryError):
        tr.l2l(e, [2.5, 0, 0], 4)
    with pytest.raises(GeometryError):
        tr.l2l(e, [0.5, 0, 0], 4, radius=1.6)
    with pytest.raises(ValueError):
        tr.l2l(s2m([0, 0, 0.1], 1.0, np.zeros(3), 3), [1, 0, 0], 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10), st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_l2l_matches_quadrature_oracle(p, q, seed):
    rng = np.random.default_rng(seed)
    e = s2l(rng.uniform(1.5, 3.0) * _unit(rng), 1.0, np.zeros(3), p, radius=1.0)
    c = rng.uniform(0, 0.7) * _unit(rng)
    rho = (1 - np.linalg.norm(c)) * rng.uniform(0.3, 1.0)
    _scaled_close(tr.l2l(e, c, q, radius=rho), tr.reexpand_via_quadrature(e, c, rho, q),
                  rho, 1e-10)

# }}}


# {{{ m2l

def test_m2l_monopole_matches_s2l():
    cm = np.array([0.1, -0.2, 0.3])
    e = s2m(cm, 2.0, cm, 5, radius=0.2)
    c = np.array([1.5, 1.0, -0.5])
    out = tr.m2l(e, c, 8)
    ref = s2l(cm, 2.0, c, 8)
    np.testing.assert_allclose(out.coeffs.data, ref.coeffs.data, rtol=1e-11, atol=1e-14)


def test_m2l_center_value_within_theorem_bound():
    # the value at the final center does not depend on q
    R, r = 2.0, 0.8
    s = r * np.array([0.0, 0.6, 0.8])
    c = np.array([0.0, 0.0, R])
    exact = 1 / np.linalg.norm(c - s)
    for p in (2, 5, 9):
        e = s2m(s, 1.0, np.zeros(3), p, radius=r)
        for q in (0, 4):
            val = eval_expansion(tr.m2l(e, c, q), c)
            assert abs(val - exact) <= (1 / (R - r)) * (r / R) ** (p + 1)
            assert val == pytest.approx(eval_expansion(e, c), rel=1e-13)


def test_m2l_geometry_errors():
    e = s2m([0, 0, 0.1], 1.0, np.zeros(3), 3, radius=1.0)
    with pytest.raises(GeometryError):
        tr.m2l(e, [0, 0, 0.9], 3)
    with pytest.raises(GeometryError):
        tr.m2l(e, [0, 0, 2.0], 3, radius=1.2)
    out = tr.m2l(e, [0, 0, 2.0], 3)
    assert out.radius == pytest.approx(1.0 * (1 - 1e-9))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10), st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_m2l_matches_quadrature_oracle(p, q, seed):
    rng = np.random.default_rng(seed)
    s = rng.uniform(0, 0.5) * _unit(rng)
    e = s2m(s, 1.0, np.zeros(3), p, radius=0.5)
    c = rng.uniform(1.5, 3.0) * _unit(rng)
    rho = (np.linalg.norm(c) - 0.5) * rng.uniform(0.2, 0.7)
    _scaled_close(tr.m2l(e, c, q, radius=rho), tr.reexpand_via_quadrature(e, c, rho, q),
                  rho, 1e-10)


def test_translation_linearity():
    rng = np.random.default_rng(9)
    a = s2m(0.3 * _unit(rng), 1.0, np.zeros(3), 6, radius=0.5)
    b = s2m(0.2 * _unit(rng), -2.0, np.zeros(3), 6, radius=0.5)
    both = Expansion("multipole", np.zeros(3), 6, 0.5, a.coeffs + b.coeffs)
    c = np.array([1.2, -0.4, 0.9])
    lhs = tr.m2l(both, c, 7).coeffs.data
    rhs = tr.m2l(a, c, 7).coeffs.data + tr.m2l(b, c, 7).coeffs.data
    np.testing.assert_allclose(lhs, rhs, rtol=1e-14, atol=1e-15 * np.max(np.abs(rhs)))


def test_quadrature_oracle_region_check():
    e = s2l([0, 0, 3.0], 1.0, np.zeros(3), 4, radius=1.0)
    with pytest.raises(GeometryError):
        tr.reexpand_via_quadrature(e, [0.5, 0, 0], 0.6, 4)
    m = s2m([0, 0, 0.1], 1.0, np.zeros(3), 4, radius=0.5)
    with pytest.raises(GeometryError):
        tr.reexpand_via_quadrature(m, [0.8, 0, 0], 0.5, 4)
    with pytest.raises(ValueError):
        tr.reexpand_via_quadrature(m, [2.0, 0, 0], 0.5, 4, target_kind="multipole")

# }}}


# {{{ chain structure

def test_omitting_intermediate_local_translation():
    rng = np.random.default_rng(12)
    e = s2l(3 * _unit(rng), 1.0, np.zeros(3), 5, radius=1.0)
    c1, c2 = 0.2 * _unit(rng), 0.4 * _unit(rng)
    chained = tr.l2l(tr.l2l(e, c1, 7), c2, 9)
    direct = tr.l2l(e, c2, 7)
    pts = c2 + 0.9 * chained.radius * _unit(rng, 20)
    np.testing.assert_allclose(eval_expansion(chained, pts), eval_expansion(direct, pts),
                               rtol=1e-10)


def test_zero_table_translates_to_zero():
    m = Expansion("multipole", np.zeros(3), 4, 0.5, CoefficientTable.zeros(4))
    assert np.all(tr.m2l(m, [2.0, 0, 0], 4).coeffs.data == 0)

# }}}
