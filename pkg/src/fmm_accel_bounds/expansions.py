"""Local and multipole expansions of harmonic functions.

An order-p local expansion about c is sum L_n^m R_n^m(x - c) over n <= p;
a multipole expansion is sum M_n^m I_n^m(x - c). Coefficients are formed
either in closed form from point sources (through the solid-harmonic form of
the Laplace addition theorem) or from boundary values on a sphere by
quadrature.

The kernel is the unit-strength potential 1/|x - s| without the 1/(4 pi)
factor of the Green's function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from . import special_functions as sf
from .sphere_quadrature import ConvergenceError, SphereRule, gauss_legendre_rule, sphere_rule

ExpansionKind = Literal["local", "multipole"]

REGION_RTOL = 1e-12
DEFAULT_LOCAL_SHRINK = 0.999
DEFAULT_MULTIPOLE_GROW = 1.001
MIN_MULTIPOLE_RADIUS = 1e-30
MAX_AUTO_DEGREE = 512
SELF_CHECK_RTOL = 1e-12


class GeometryError(ValueError):
    """An evaluation point or center lies outside the admissible region."""


# {{{ data types

@dataclass(frozen=True)
class CoefficientTable:
    """Packed triangular table of complex coefficients, (order+1)**2 entries."""

    order: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.shape != (sf.table_size(self.order),):
            raise ValueError(
                f"order {self.order} needs {sf.table_size(self.order)} entries, "
                f"got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("coefficient table has non-finite entries")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, order: int) -> "CoefficientTable":
        return cls(order, np.zeros(sf.table_size(order), dtype=complex))

    def __getitem__(self, idx) -> complex:
        n, m = sf.HarmonicIndex.make(*idx)
        if n > self.order:
            return 0j
        return complex(self.data[sf.packed_index(n, m)])

    def with_order(self, order: int) -> "CoefficientTable":
        """Truncate, or pad with zeros, to ``order``."""
        size = sf.table_size(order)
        if order <= self.order:
            return CoefficientTable(order, self.data[:size].copy())
        data = np.zeros(size, dtype=complex)
        data[: self.data.size] = self.data
        return CoefficientTable(order, data)

    def conjugate_symmetry_defect(self) -> float:
        """max |c(n,-m) - (-1)^m conj(c(n,m))|; zero for real fields."""
        n, m = sf.index_arrays(self.order)
        mirrored = self.data[n * n + n - m]
        return float(np.max(np.abs(self.data - (-1.0) ** m * np.conj(mirrored)),
                            initial=0.0))

    def __add__(self, other: "CoefficientTable") -> "CoefficientTable":
        order = max(self.order, other.order)
        return CoefficientTable(
            order, self.with_order(order).data + other.with_order(order).data)

    def scaled(self, factor: complex) -> "CoefficientTable":
        return CoefficientTable(self.order, factor * self.data)


@dataclass(frozen=True)
class Expansion:
    kind: ExpansionKind
    center: np.ndarray
    order: int
    radius: float
    coeffs: CoefficientTable

    def __post_init__(self):
        if self.kind not in ("local", "multipole"):
            raise ValueError(f"unknown expansion kind {self.kind!r}")
        center = sf.as_vec3(self.center).copy()
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        if not self.radius > 0 or not math.isfinite(self.radius):
            raise ValueError("validity radius must be positive and finite")
        if self.coeffs.order != self.order:
            raise ValueError("coefficient table order does not match expansion order")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": [float(c) for c in self.center],
            "order": int(self.order),
            "radius": float(self.radius),
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coeffs.data],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Expansion":
        coeffs = np.array([complex(re, im) for re, im in d["coefficients"]])
        order = int(d["order"])
        return cls(d["kind"], np.array(d["center"], dtype=float), order,
                   float(d["radius"]), CoefficientTable(order, coeffs))


@dataclass(frozen=True)
class PointSources:
    positions: np.ndarray  # (N, 3)
    weights: np.ndarray  # (N,)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if pos.shape[-1] != 3 or pos.shape[0] != w.shape[0]:
            raise ValueError("positions and weights must have matching lengths")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(w))):
            raise ValueError("point sources must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

# }}}


def eval_point_potential(src: PointSources, target) -> float:
    """sum_i w_i / |target - s_i|."""
    target = sf.as_vec3(target)
    dist = np.linalg.norm(src.positions - target, axis=1)
    if np.any(dist == 0):
        raise sf.SingularityError("target coincides with a source")
    return float(np.sum(src.weights / dist))


# {{{ closed-form formation

def _degree_factor(order: int) -> np.ndarray:
    n, _ = sf.index_arrays(order)
    return 4 * np.pi / (2 * n + 1)


def s2l(source, weight: float, center, order: int, radius: float | None = None) -> Expansion:
    """Local expansion of ``weight / |x - source|`` about ``center``.

    The validity radius defaults to 0.999 |source - center|; it must be
    smaller than that distance.
    """
    source, center = sf.as_vec3(source), sf.as_vec3(center)
    dist = float(np.linalg.norm(source - center))
    if dist == 0:
        raise sf.SingularityError("source coincides with the expansion center")
    if radius is None:
        radius = DEFAULT_LOCAL_SHRINK * dist
    if radius >= dist:
        raise GeometryError("local validity radius must be below the source distance")
    irr = sf.irregular_solid_table(order, source - center)
    data = weight * _degree_factor(order) * np.conj(irr)
    return Expansion("local", center, order, radius, CoefficientTable(order, data))


def s2m(source, weight: float, center, order: int, radius: float | None = None) -> Expansion:
    """Multipole expansion of ``weight / |x - source|`` about ``center``."""
    source, center = sf.as_vec3(source), sf.as_vec3(center)
    dist = float(np.linalg.norm(source - center))
    if radius is None:
        radius = max(DEFAULT_MULTIPOLE_GROW * dist, MIN_MULTIPOLE_RADIUS)
    if radius < dist:
        raise GeometryError("multipole validity radius must enclose the source")
    reg = sf.regular_solid_table(order, source - center)
    data = weight * _degree_factor(order) * np.conj(reg)
    return Expansion("multipole", center, order, radius, CoefficientTable(order, data))

# }}}


# {{{ quadrature formation

def _sphere_moments(f, center, radius, order, rule: SphereRule) -> np.ndarray:
    """int f(center + radius xi) conj(Y_n^m(xi)) dS(xi), packed."""
    vals = np.asarray(f(center + radius * rule.nodes))
    ylm = sf.sph_harm_table(order, rule.nodes)
    return (rule.weights * vals) @ np.conj(ylm)


def _moments_auto(f, center, radius, order, rule):
    if rule is not None:
        return _sphere_moments(f, center, radius, order, rule)
    degree = 2 * order + 16
    prev = _sphere_moments(f, center, radius, order, sphere_rule(degree))
    while True:
        degree *= 2
        if degree > MAX_AUTO_DEGREE:
            raise ConvergenceError(
                "sphere quadrature did not converge; pass an explicit rule")
        cur = _sphere_moments(f, center, radius, order, sphere_rule(degree))
        scale = max(np.max(np.abs(cur)), np.finfo(float).tiny)
        if np.max(np.abs(cur - prev)) <= SELF_CHECK_RTOL * scale:
            return cur
        prev = cur


def local_from_function(f: Callable[[np.ndarray], np.ndarray], center, radius: float,
                        order: int, rule: SphereRule | None = None) -> Expansion:
    """Local expansion of ``f`` from its values on the sphere |x - center| = radius.

    ``f`` maps an (N, 3) array of points to N values. Without an explicit
    ``rule`` the quadrature degree starts at 2*order + 16 and doubles until
    the coefficients change by less than 1e-12 relative.
    """
    center = sf.as_vec3(center)
    mom = _moments_auto(f, center, radius, order, rule)
    n, _ = sf.index_arrays(order)
    return Expansion("local", center, order, radius,
                     CoefficientTable(order, mom * float(radius) ** (-n.astype(float))))


def multipole_from_function(f: Callable[[np.ndarray], np.ndarray], center, radius: float,
                            order: int, rule: SphereRule | None = None) -> Expansion:
    """Multipole expansion of ``f`` from its values on |x - center| = radius."""
    center = sf.as_vec3(center)
    mom = _moments_auto(f, center, radius, order, rule)
    n, _ = sf.index_arrays(order)
    return Expansion("multipole", center, order, radius,
                     CoefficientTable(order, mom * float(radius) ** (n + 1.0)))

# }}}


# {{{ evaluation

def in_region(e: Expansion, x) -> np.ndarray:
    d = np.linalg.norm(np.asarray(x, dtype=float) - e.center, axis=-1)
    if e.kind == "local":
        return d <= e.radius * (1 + REGION_RTOL)
    return (d >= e.radius * (1 - REGION_RTOL)) & (d > 0)


def eval_expansion(e: Expansion, x):
    """Evaluate the truncated series at ``x`` (shape (3,) or (N, 3))."""
    x = np.asarray(x, dtype=float)
    inside = in_region(e, x)
    if not np.all(inside):
        if e.kind == "multipole" and np.any(np.all(x == e.center, axis=-1)):
            raise sf.SingularityError("multipole expansion evaluated at its center")
        raise GeometryError(f"point outside the {e.kind} expansion's validity region")
    if e.kind == "local":
        basis = sf.regular_solid_table(e.order, x - e.center)
    else:
        basis = sf.irregular_solid_table(e.order, x - e.center)
    val = basis @ e.coeffs.data
    return complex(val) if val.ndim == 0 else val

# }}}


# {{{ Fourier-Laplace projection and Lebesgue constants

def fourier_laplace_project(f: Callable[[np.ndarray], np.ndarray], order: int,
                            rule: SphereRule) -> Callable[[np.ndarray], np.ndarray]:
    """Degree-``order`` Fourier-Laplace projection of a function on the unit sphere."""
    coeffs = (rule.weights * np.asarray(f(rule.nodes))) @ np.conj(
        sf.sph_harm_table(order, rule.nodes))

    def projected(xi):
        return sf.sph_harm_table(order, xi) @ coeffs

    return projected


def projection_kernel(order: int, t):
    """Zonal kernel sum_{n<=order} (2n+1)/(4 pi) P_n(t) of the projection."""
    pn = sf.legendre_table(order, t)
    n = np.arange(order + 1).reshape((-1,) + (1,) * (pn.ndim - 1))
    return np.sum((2 * n + 1) * pn, axis=0) / sf.FOUR_PI


def _bisect(g, a, b, ga):
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == (ga > 0):
            a, ga = mid, gm
        else:
            b = mid
    return 0.5 * (a + b)


def lebesgue_constant(order: int, panel_count: int = 64) -> float:
    """Sup-norm of the degree-``order`` Fourier-Laplace projection.

    The kernel is zonal, so the norm is 2 pi times the integral of |kernel|
    over [-1, 1]. Sign changes are bracketed on a grid uniform in arccos(t),
    refined by bisection, and each sign-definite piece is split into panels
    integrated by Gauss-Legendre rules exact for the polynomial kernel.
    """
    if panel_count < 64:
        raise ValueError("panel_count must be at least 64")

    def g(t):
        return float(projection_kernel(order, np.array(t)))

    grid_size = max(panel_count, 16 * (order + 1))
    grid = np.cos(np.linspace(np.pi, 0.0, grid_size + 1))
    grid[0], grid[-1] = -1.0, 1.0
    vals = projection_kernel(order, grid)
    breaks = [-1.0]
    for a, b, ga, gb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if ga == 0 and a != -1.0:
            breaks.append(float(a))
        elif ga * gb < 0:
            breaks.append(_bisect(g, float(a), float(b), float(ga)))
    breaks.append(1.0)
    breaks = np.unique(breaks)

    # composite panels: at least panel_count in total, distributed by length
    lengths = np.diff(breaks)
    per_piece = np.maximum(1, np.ceil(panel_count * lengths / 2.0).astype(int))
    nodes, weights = gauss_legendre_rule(order // 2 + 2)
    total = 0.0
    for a, b, k in zip(breaks[:-1], breaks[1:], per_piece):
        edges = np.linspace(a, b, k + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        w = (half[:, None] * weights[None, :]).ravel()
        total += abs(np.dot(w, projection_kernel(order, t)))
    return float(2 * np.pi * total)

# }}}
