"""Closed-form acceleration-error bounds for translation chains.

All chain bounds share the geometric term (1/(R - r)) (r/R)^(p+1). Powers
are evaluated as exp((p+1) log(r/R)) so very large orders underflow cleanly
to zero; the ``*_checked`` variants report when that happened.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expansions import GeometryError
from .special_functions import DomainError

TF_LIMIT = 2 * math.sqrt(3) - 2
COMPAT_RTOL = 1e-12


@dataclass(frozen=True)
class ChainGeometry:
    """Separation R and radius r of a chain, plus R', r' for the M2L2L chain."""

    R: float
    r: float
    R_prime: float | None = None
    r_prime: float | None = None

    def __post_init__(self):
        if not (self.R > self.r > 0):
            raise GeometryError(f"need R > r > 0, got R={self.R}, r={self.r}")
        if (self.R_prime is None) != (self.r_prime is None):
            raise GeometryError("R_prime and r_prime must be given together")
        if self.R_prime is not None and not (self.R_prime > self.r_prime > 0):
            raise GeometryError(
                f"need R' > r' > 0, got R'={self.R_prime}, r'={self.r_prime}")
        if self.R_prime is not None:
            # |c| = R' + r = R + r' can only hold when R' + r = R + r'
            lhs, rhs = self.R_prime + self.r, self.R + self.r_prime
            if abs(lhs - rhs) > COMPAT_RTOL * max(lhs, rhs):
                raise GeometryError(f"need R' + r = R + r', got {lhs} and {rhs}")

    @property
    def has_second_stage(self) -> bool:
        return self.R_prime is not None

    def check_compatible(self, center_distance: float, rtol: float = 1e-12) -> None:
        """Enforce |c| = R' + r = R + r' for the three-stage chain."""
        if not self.has_second_stage:
            raise GeometryError("compatibility only applies to the three-stage chain")
        scale = max(center_distance, 1.0)
        if (abs(center_distance - (self.R_prime + self.r)) > rtol * scale
                or abs(center_distance - (self.R + self.r_prime)) > rtol * scale):
            raise GeometryError("need |c| = R' + r = R + r'")


@dataclass(frozen=True)
class GigaqbxBoundInput:
    p: int
    t_f: float
    A: float = 1.0
    M: float = 1.0
    R: float = 1.0

    def __post_init__(self):
        if not (0 <= self.t_f < TF_LIMIT):
            raise DomainError(f"target confinement factor must lie in [0, {TF_LIMIT:.6f})")
        if self.p < 0:
            raise DomainError("order must be non-negative")
        if not self.R > 0:
            raise DomainError("minimum box radius must be positive")


def _geometric_term(R: float, r: float, p: int) -> tuple[float, bool]:
    log_val = (p + 1) * math.log(r / R) - math.log(R - r)
    val = math.exp(log_val) if log_val > -745.2 else 0.0
    return val, val == 0.0


def bound_local_of_regular(n: int, c, t) -> float:
    """Bound on |L_c^p[R_n^0](t)|, valid for every order p."""
    c, t = np.asarray(c, dtype=float), np.asarray(t, dtype=float)
    reach = np.linalg.norm(c) + np.linalg.norm(t - c)
    return math.sqrt((2 * n + 1) / (4 * math.pi)) * float(reach) ** n


def bound_local_of_irregular(n: int, c, t) -> float:
    """Bound on |L_c^p[I_n^0](t)| for |t - c| < |c|."""
    c, t = np.asarray(c, dtype=float), np.asarray(t, dtype=float)
    gap = float(np.linalg.norm(c) - np.linalg.norm(t - c))
    if not gap > 0:
        raise GeometryError("need |t - c| < |c|")
    return math.sqrt((2 * n + 1) / (4 * math.pi)) * gap ** (-(n + 1.0))


def bound_chain_s2l2l_checked(g: ChainGeometry, p: int) -> tuple[float, bool]:
    return _geometric_term(g.R, g.r, p)


def bound_chain_s2l2l(g: ChainGeometry, p: int) -> float:
    """Source -> Local(p) -> Local(q) bound; does not depend on q."""
    return bound_chain_s2l2l_checked(g, p)[0]


def bound_chain_s2m2l_checked(g: ChainGeometry, p: int) -> tuple[float, bool]:
    return _geometric_term(g.R, g.r, p)


def bound_chain_s2m2l(g: ChainGeometry, p: int) -> float:
    """Source -> Multipole(p) -> Local(q) bound; same form as the local chain."""
    return bound_chain_s2m2l_checked(g, p)[0]


def bound_chain_m2l2l_checked(g: ChainGeometry, p: int) -> tuple[float, bool]:
    if not g.has_second_stage:
        raise GeometryError("the three-stage bound needs R_prime and r_prime")
    first, u1 = _geometric_term(g.R, g.r, p)
    second, u2 = _geometric_term(g.R_prime, g.r_prime, p)
    return first + second, u1 and u2


def bound_chain_m2l2l(g: ChainGeometry, p: int) -> float:
    """Source -> Multipole(p) -> Local(p) -> Local(q): sum of both stage terms."""
    return bound_chain_m2l2l_checked(g, p)[0]


def bound_gigaqbx(q_in: GigaqbxBoundInput) -> float:
    """Acceleration-error expression for GIGAQBX with A, M, R scale inputs.

    M is an unspecified constant (default 1), so this evaluates the
    expression rather than certifying a bound.
    """
    s3 = math.sqrt(3)
    p, tf = q_in.p, q_in.t_f
    near = (p + 1) * math.log(s3 / 3) - math.log(3 - s3)
    far = (p + 1) * math.log(s3 * (1 + tf) / (6 - s3)) - math.log(6 - 2 * s3 - s3 * tf)
    return q_in.A * q_in.M / q_in.R * math.exp(max(near, far))


def lebesgue_asymptotic(p: int) -> float:
    """Leading asymptotic sqrt(8p/pi) of the Fourier-Laplace Lebesgue constant."""
    if p < 1:
        raise DomainError("asymptotic form needs p >= 1")
    return math.sqrt(8 * p / math.pi)
