"""Local-to-local and multipole-to-local translation operators.

Both operators apply the addition theorems for shifted solid harmonics,

    R_n^m(x + y) = A_n^m sum_{nu, mu} C(n+m, nu+mu)
                   R_{n-nu}^{m-mu}(y) R_nu^mu(x) / (A_{n-nu}^{m-mu} A_nu^mu),

    I_n^m(x + y) = A_n^m sum_{nu, mu} (-1)^(nu-m-mu) C(n+nu-mu, n-m)
                   I_{n+nu}^mu(y) R_nu^{m-mu}(x) / (A_{n+nu}^mu A_nu^{m-mu}),

to each basis function of the source expansion, at O(p^2 q^2) cost. The
index bookkeeping depends only on the orders and is cached as a dense
(output x input) pattern.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import special_functions as sf
from .expansions import (
    CoefficientTable,
    Expansion,
    GeometryError,
    REGION_RTOL,
    eval_expansion,
    local_from_function,
)
from .sphere_quadrature import SphereRule

M2L_RADIUS_GAP = 1e-9


@lru_cache(maxsize=256)
def _l2l_plan(p: int, q: int):
    """factor[(nu, mu), (n, m)] and the packed index of R_{n-nu}^{m-mu}."""
    nu, mu = (a[:, None] for a in sf.index_arrays(q))
    n, m = (a[None, :] for a in sf.index_arrays(p))
    k, dm = n - nu, m - mu
    valid = (k >= 0) & (np.abs(dm) <= k)
    k, dm = np.where(valid, k, 0), np.where(valid, dm, 0)
    a = sf.norm_const_table(max(p, q))
    binoms = sf.binom_table(2 * max(p, q))
    coeff = binoms[n + m, nu + mu]
    factor = a[sf.packed_index(n, m)] * coeff / (a[k * k + k + dm] * a[sf.packed_index(nu, mu)])
    return _freeze(np.where(valid, factor, 0.0), k * k + k + dm)


@lru_cache(maxsize=256)
def _m2l_plan(p: int, q: int):
    """factor[(nu, mu_out), (n, m)] and the packed index of I_{n+nu}^{m-mu_out}."""
    nu, mu_out = (a[:, None] for a in sf.index_arrays(q))
    n, m = (a[None, :] for a in sf.index_arrays(p))
    mu = m - mu_out
    sign = np.where((nu + mu_out) % 2, -1.0, 1.0)
    a = sf.norm_const_table(p + q)
    binoms = sf.binom_table(2 * (p + q))
    coeff = binoms[n + nu - mu, n - m]
    deg = n + nu
    factor = (sign * a[sf.packed_index(n, m)] * coeff
              / (a[deg * deg + deg + mu] * a[sf.packed_index(nu, mu_out)]))
    return _freeze(factor, deg * deg + deg + mu)


def _freeze(factor, basis_idx):
    factor = np.ascontiguousarray(factor, dtype=float)
    basis_idx = np.ascontiguousarray(basis_idx, dtype=np.intp)
    factor.flags.writeable = False
    basis_idx.flags.writeable = False
    return factor, basis_idx


def _apply(plan, basis: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    factor, basis_idx = plan
    return (factor * basis[basis_idx]) @ coeffs


def l2l(src: Expansion, new_center, new_order: int, radius: float | None = None) -> Expansion:
    """Re-center a local expansion.

    The new validity radius defaults to ``src.radius - |new_center - src.center|``.
    For ``new_order >= src.order`` the result represents the same polynomial.
    """
    if src.kind != "local":
        raise ValueError("l2l needs a local expansion")
    new_center = sf.as_vec3(new_center)
    shift = new_center - src.center
    max_radius = src.radius - float(np.linalg.norm(shift))
    if radius is None:
        radius = max_radius
    if not max_radius > 0 or radius > max_radius * (1 + REGION_RTOL) or radius <= 0:
        raise GeometryError("translated local ball leaves the source expansion's ball")
    basis = sf.regular_solid_table(src.order, shift)
    data = _apply(_l2l_plan(src.order, new_order), basis, src.coeffs.data)
    return Expansion("local", new_center, new_order, radius,
                     CoefficientTable(new_order, data))


def m2l(src: Expansion, new_center, new_order: int, radius: float | None = None) -> Expansion:
    """Convert a multipole expansion into a local expansion about ``new_center``.

    The target ball must not intersect the multipole ball; its radius
    defaults to (1 - 1e-9) times the largest admissible value.
    """
    if src.kind != "multipole":
        raise ValueError("m2l needs a multipole expansion")
    new_center = sf.as_vec3(new_center)
    shift = new_center - src.center
    gap = float(np.linalg.norm(shift)) - src.radius
    if not gap > 0:
        raise GeometryError("local center lies inside the multipole ball")
    if radius is None:
        radius = gap * (1 - M2L_RADIUS_GAP)
    if radius <= 0 or radius > gap * (1 + REGION_RTOL):
        raise GeometryError("local ball intersects the multipole ball")
    basis = sf.irregular_solid_table(src.order + new_order, shift)
    data = _apply(_m2l_plan(src.order, new_order), basis, src.coeffs.data)
    return Expansion("local", new_center, new_order, radius,
                     CoefficientTable(new_order, data))


def reexpand_via_quadrature(src: Expansion, new_center, new_radius: float, new_order: int,
                            rule: SphereRule | None = None,
                            target_kind: str = "local") -> Expansion:
    """Local expansion of the field of ``src`` formed by sphere quadrature.

    Independent of the addition-theorem operators; used to cross-check them.
    """
    if target_kind != "local":
        raise ValueError("only local re-expansion is supported")
    new_center = sf.as_vec3(new_center)
    d = float(np.linalg.norm(new_center - src.center))
    if src.kind == "local":
        ok = d + new_radius <= src.radius * (1 + REGION_RTOL)
    else:
        ok = d - new_radius >= src.radius * (1 - REGION_RTOL)
    if not ok:
        raise GeometryError("quadrature sphere leaves the source expansion's region")
    return local_from_function(lambda pts: eval_expansion(src, pts), new_center,
                               new_radius, new_order, rule)
