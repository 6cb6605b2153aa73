"""Gauss-Legendre rules and tensor-product quadrature on the unit sphere."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np


class ConvergenceError(RuntimeError):
    pass


@lru_cache(maxsize=64)
def _gauss_legendre_cached(count: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, count + 1)
    # Chebyshev-like initial guesses for the roots of P_count.
    x = np.cos(np.pi * (k - 0.25) / (count + 0.5))
    for _ in range(100):
        p0, p1 = np.ones_like(x), x.copy()
        for j in range(1, count):
            p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
        # derivative of P_count from P_count and P_count-1
        dp = count * (x * p1 - p0) / (x * x - 1)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise ConvergenceError(f"Newton iteration failed for {count} nodes")
    p0, p1 = np.ones_like(x), x.copy()
    for j in range(1, count):
        p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
    dp = count * (x * p1 - p0) / (x * x - 1)
    w = 2.0 / ((1 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_legendre_rule(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``count``-point Gauss-Legendre rule on [-1, 1].

    Exact for polynomials of degree up to ``2*count - 1``.
    """
    if count < 1:
        raise ValueError("need at least one node")
    x, w = _gauss_legendre_cached(int(count))
    return x.copy(), w.copy()


@dataclass(frozen=True)
class SphereRule:
    nodes: np.ndarray  # (N, 3) unit vectors
    weights: np.ndarray  # (N,)
    exactness_degree: int

    def __len__(self):
        return len(self.weights)


@lru_cache(maxsize=32)
def sphere_rule(exactness_degree: int) -> SphereRule:
    """Gauss-Legendre in cos(theta) times equispaced azimuths.

    Integrates every spherical harmonic of degree <= ``exactness_degree``
    exactly (up to rounding).
    """
    if exactness_degree < 0:
        raise ValueError("exactness degree must be non-negative")
    n_theta = math.ceil((exactness_degree + 1) / 2)
    n_phi = exactness_degree + 1
    t, wt = gauss_legendre_rule(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt((1 - t) * (1 + t))
    nodes = np.stack(
        [
            np.outer(st, np.cos(phi)),
            np.outer(st, np.sin(phi)),
            np.outer(t, np.ones(n_phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.outer(wt, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return SphereRule(nodes, weights, exactness_degree)


def integrate(rule: SphereRule, f: Callable[[np.ndarray], np.ndarray]):
    """Apply the rule to ``f``, which maps an (N, 3) node array to N values.

    Values may carry trailing axes; the result then has those axes.
    """
    vals = np.asarray(f(rule.nodes))
    return np.tensordot(rule.weights, vals, axes=(0, 0))
