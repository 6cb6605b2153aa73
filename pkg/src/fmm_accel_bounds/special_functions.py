"""Legendre functions, spherical and solid harmonics, and small helpers.

Conventions: associated Legendre functions are Ferrers functions with the
Condon-Shortley phase, and

    Y_n^m(xi) = A_n^m P_n^m(cos theta) exp(i m phi),
    A_n^m = sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!),

which is orthonormal on the unit sphere. Negative orders come from
Y_n^{-m} = (-1)^m conj(Y_n^m).

Harmonic tables are packed triangularly: entry (n, m) lives at n*n + n + m,
so a table of order p has (p+1)**2 entries.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

FOUR_PI = 4.0 * math.pi
UNIT_TOL = 1e-12
MAX_DEGREE = 128


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class SingularityError(ValueError):
    """Evaluation at a singular point (coincident source/target, origin)."""


class HarmonicIndex(NamedTuple):
    n: int
    m: int

    @classmethod
    def make(cls, n: int, m: int) -> "HarmonicIndex":
        if n < 0 or abs(m) > n:
            raise IndexError(f"invalid harmonic index (n={n}, m={m})")
        return cls(int(n), int(m))


def packed_index(n: int, m: int) -> int:
    """Position of (n, m) in a packed triangular table."""
    return n * n + n + m


def table_size(order: int) -> int:
    return (order + 1) ** 2


@lru_cache(maxsize=None)
def _index_arrays(order: int) -> tuple[np.ndarray, np.ndarray]:
    n = np.repeat(np.arange(order + 1), 2 * np.arange(order + 1) + 1)
    m = np.concatenate([np.arange(-k, k + 1) for k in range(order + 1)])
    n.flags.writeable = False
    m.flags.writeable = False
    return n, m


def index_arrays(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Degree and order arrays matching the packed layout."""
    return _index_arrays(order)


def as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite components")
    return a


def unit_vector(v) -> np.ndarray:
    a = as_vec3(v)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        raise SingularityError("cannot normalize the zero vector")
    return a / norm


# {{{ Legendre functions

def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + UNIT_TOL):
        raise DomainError("argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def legendre_p(n: int, t):
    """Legendre polynomial P_n(t) by the three-term recurrence."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    t = _check_t(t)
    p_prev, p = np.ones_like(t), t.copy()
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * t * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


def legendre_table(order: int, t) -> np.ndarray:
    """P_0(t), ..., P_order(t) stacked along the first axis."""
    t = _check_t(t)
    out = np.empty((order + 1,) + t.shape)
    out[0] = 1.0
    if order >= 1:
        out[1] = t
    for k in range(1, order):
        out[k + 1] = ((2 * k + 1) * t * out[k] - k * out[k - 1]) / (k + 1)
    return out


def assoc_legendre(n: int, m: int, t):
    """Ferrers function P_n^m(t) (Condon-Shortley phase), 0 <= m <= n.

    Recurs upward in degree from the closed form of P_m^m. Degrees up to
    128 stay within double range.
    """
    if not 0 <= m <= n:
        raise DomainError(f"need 0 <= m <= n, got n={n}, m={m}")
    if n > MAX_DEGREE:
        raise DomainError(f"degree {n} exceeds supported maximum {MAX_DEGREE}")
    t = _check_t(t)
    sin_theta = np.sqrt((1.0 - t) * (1.0 + t))
    pmm = np.ones_like(t)
    for k in range(1, m + 1):
        pmm = -(2 * k - 1) * sin_theta * pmm
    if n == m:
        return pmm if pmm.ndim else float(pmm)
    p_prev, p = pmm, (2 * m + 1) * t * pmm
    for k in range(m + 2, n + 1):
        p_prev, p = p, ((2 * k - 1) * t * p - (k + m - 1) * p_prev) / (k - m)
    return p if p.ndim else float(p)


def norm_const_a(n: int, m: int) -> float:
    """A_n^m = sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!), in log space."""
    if abs(m) > n:
        raise IndexError(f"|m| > n for (n={n}, m={m})")
    log_ratio = math.lgamma(n - m + 1) - math.lgamma(n + m + 1)
    return math.sqrt((2 * n + 1) / FOUR_PI) * math.exp(0.5 * log_ratio)


def norm_const_table(order: int) -> np.ndarray:
    n, m = index_arrays(order)
    return np.array([norm_const_a(int(a), int(b)) for a, b in zip(n, m)])


def binom(n: int, k: int) -> float:
    """Binomial coefficient as a float, zero when k is out of range."""
    if k < 0 or n < 0 or k > n:
        return 0.0
    return float(math.comb(n, k))


@lru_cache(maxsize=16)
def binom_table(max_n: int) -> np.ndarray:
    """B[n, k] = binom(n, k) for 0 <= n, k <= max_n, zero for k > n (read-only)."""
    table = np.zeros((max_n + 1, max_n + 1))
    for n in range(max_n + 1):
        table[n, : n + 1] = [float(math.comb(n, k)) for k in range(n + 1)]
    table.flags.writeable = False
    return table


# }}}


# {{{ spherical harmonics

@lru_cache(maxsize=None)
def _recurrence_coeffs(order: int):
    n = np.arange(order + 1, dtype=float)[:, None]
    m = np.arange(order + 1, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.sqrt((4 * n * n - 1) / (n * n - m * m))
        b = np.sqrt(((n - 1) ** 2 - m * m) / (4 * (n - 1) ** 2 - 1))
    diag = np.sqrt((2 * n[1:, 0] + 1) / (2 * n[1:, 0]))
    return a, b, diag


def _normalized_legendre(order: int, cos_t: np.ndarray, sin_t: np.ndarray):
    """A_n^m P_n^m for 0 <= m <= n <= order, indexed [n, m, ...]."""
    a, b, diag = _recurrence_coeffs(order)
    trail = (1,) * cos_t.ndim
    out = np.zeros((order + 1, order + 1) + cos_t.shape)
    out[0, 0] = 1.0 / math.sqrt(FOUR_PI)
    for m in range(1, order + 1):
        out[m, m] = -diag[m - 1] * sin_t * out[m - 1, m - 1]
    for n in range(1, order + 1):
        out[n, n - 1] = math.sqrt(2 * n + 1) * cos_t * out[n - 1, n - 1]
        if n >= 2:
            k = n - 1
            out[n, :k] = a[n, :k].reshape((k,) + trail) * (
                cos_t * out[n - 1, :k] - b[n, :k].reshape((k,) + trail) * out[n - 2, :k])
    return out


@lru_cache(maxsize=None)
def _layout(order: int):
    n, m = index_arrays(order)
    pos = m >= 0
    neg_dst = np.flatnonzero(m < 0)
    neg_src = n[neg_dst] * n[neg_dst] + n[neg_dst] - m[neg_dst]
    neg_sign = (-1.0) ** m[neg_dst]
    return np.flatnonzero(pos), n[pos], m[pos], neg_dst, neg_src, neg_sign


def _fill_negative_orders(table: np.ndarray, order: int) -> None:
    _, _, _, dst, src, sign = _layout(order)
    table[..., dst] = sign * np.conj(table[..., src])


def _angles(points: np.ndarray):
    """cos(theta), sin(theta), exp(i phi) for (non-zero) points [..., 3]."""
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    rho_xy = np.hypot(x, y)
    r = np.hypot(rho_xy, z)
    safe_r = np.where(r > 0, r, 1.0)
    cos_t = np.where(r > 0, z / safe_r, 1.0)
    sin_t = np.where(r > 0, rho_xy / safe_r, 0.0)
    safe_rho = np.where(rho_xy > 0, rho_xy, 1.0)
    eiphi = np.where(rho_xy > 0, (x + 1j * y) / safe_rho, 1.0 + 0j)
    return r, cos_t, sin_t, eiphi


def _harmonics_from_angles(order, cos_t, sin_t, eiphi):
    plm = _normalized_legendre(order, cos_t, sin_t)
    pos_idx, pos_n, pos_m, _, _, _ = _layout(order)
    phases = eiphi[..., None] ** np.arange(order + 1)
    table = np.zeros(cos_t.shape + (table_size(order),), dtype=complex)
    table[..., pos_idx] = np.moveaxis(plm[pos_n, pos_m], 0, -1) * phases[..., pos_m]
    _fill_negative_orders(table, order)
    return table


def sph_harm_table(order: int, xi) -> np.ndarray:
    """All Y_n^m(xi) with n <= order, packed along the last axis.

    ``xi`` has shape (..., 3) and is renormalized; it must be a unit vector
    within 1e-12.
    """
    xi = np.asarray(xi, dtype=float)
    r, cos_t, sin_t, eiphi = _angles(xi)
    if np.any(np.abs(r - 1.0) > UNIT_TOL):
        raise DomainError("spherical harmonics need unit vectors")
    return _harmonics_from_angles(order, cos_t, sin_t, eiphi)


def sph_harm(idx, xi) -> complex:
    n, m = HarmonicIndex.make(*idx)
    return complex(sph_harm_table(n, as_vec3(xi))[packed_index(n, m)])


def regular_solid_table(order: int, x) -> np.ndarray:
    """R_n^m(x) = |x|^n Y_n^m(x/|x|) for n <= order, packed on the last axis.

    At the origin only R_0^0 = 1/sqrt(4 pi) is non-zero.
    """
    x = np.asarray(x, dtype=float)
    r, cos_t, sin_t, eiphi = _angles(x)
    table = _harmonics_from_angles(order, cos_t, sin_t, eiphi)
    n, _ = index_arrays(order)
    return table * r[..., None] ** n


def irregular_solid_table(order: int, x) -> np.ndarray:
    """I_n^m(x) = |x|^-(n+1) Y_n^m(x/|x|) for n <= order."""
    x = np.asarray(x, dtype=float)
    r, cos_t, sin_t, eiphi = _angles(x)
    if np.any(r == 0):
        raise SingularityError("irregular solid harmonics are singular at the origin")
    table = _harmonics_from_angles(order, cos_t, sin_t, eiphi)
    n, _ = index_arrays(order)
    return table * r[..., None] ** (-(n + 1.0))


def regular_solid(idx, x) -> complex:
    n, m = HarmonicIndex.make(*idx)
    return complex(regular_solid_table(n, as_vec3(x))[packed_index(n, m)])


def irregular_solid(idx, x) -> complex:
    n, m = HarmonicIndex.make(*idx)
    return complex(irregular_solid_table(n, as_vec3(x))[packed_index(n, m)])


# }}}


# {{{ Poisson kernel

def poisson_kernel(r, t):
    """Poisson kernel of the unit ball, (1 - r^2) / (4 pi (1 + r^2 - 2rt)^1.5)."""
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) >= 1):
        raise DomainError("Poisson kernel needs |r| < 1")
    t = _check_t(t)
    val = (1 - r * r) / (FOUR_PI * (1 + r * r - 2 * r * t) ** 1.5)
    return val if np.ndim(val) else float(val)


def poisson_kernel_series(r, t, terms: int):
    """Partial Legendre series (1/4pi) sum_{n<=terms} (2n+1) r^n P_n(t)."""
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) >= 1):
        raise DomainError("Poisson kernel needs |r| < 1")
    pn = legendre_table(terms, t)
    n = np.arange(terms + 1).reshape((-1,) + (1,) * pn[0].ndim)
    val = np.sum((2 * n + 1) * r ** n * pn, axis=0) / FOUR_PI
    return val if np.ndim(val) else float(val)

# }}}
