"""Spherical-harmonic expansions for the 3D Laplace kernel, translation
operators, and the acceleration-error bounds of FMM translation chains."""

from .bounds import (
    ChainGeometry,
    GigaqbxBoundInput,
    bound_chain_m2l2l,
    bound_chain_s2l2l,
    bound_chain_s2m2l,
    bound_gigaqbx,
    bound_local_of_irregular,
    bound_local_of_regular,
    lebesgue_asymptotic,
)
from .expansions import (
    CoefficientTable,
    Expansion,
    GeometryError,
    PointSources,
    eval_expansion,
    lebesgue_constant,
    local_from_function,
    multipole_from_function,
    s2l,
    s2m,
)
from .special_functions import DomainError, SingularityError
from .sphere_quadrature import ConvergenceError, SphereRule, sphere_rule
from .translations import l2l, m2l, reexpand_via_quadrature

__version__ = "0.1.0"

__all__ = [
    "ChainGeometry", "GigaqbxBoundInput", "bound_chain_m2l2l", "bound_chain_s2l2l",
    "bound_chain_s2m2l", "bound_gigaqbx", "bound_local_of_irregular",
    "bound_local_of_regular", "lebesgue_asymptotic", "CoefficientTable", "Expansion",
    "GeometryError", "PointSources", "eval_expansion", "lebesgue_constant",
    "local_from_function", "multipole_from_function", "s2l", "s2m", "DomainError",
    "SingularityError", "ConvergenceError", "SphereRule", "sphere_rule", "l2l", "m2l",
    "reexpand_via_quadrature",
]
