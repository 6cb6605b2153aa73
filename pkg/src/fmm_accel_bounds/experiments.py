"""Sampling harness for the acceleration error of the three translation chains.

For each chain a random admissible geometry is drawn, the chain of
translations is applied to a unit point source, and the result is compared
with the exact q-th order local expansion of the source potential at the
final center. The worst ratio of measured error to the closed-form bound
over many samples estimates the leading constant of the bound.

Every sampling cell (chain, p, q) draws from its own stream seeded by
SeedSequence([seed, chain index, p, q]), so results do not depend on the
order in which cells are run.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from . import bounds
from .expansions import GeometryError, eval_expansion, s2l, s2m
from .special_functions import as_vec3
from .translations import l2l, m2l

CHAINS = ("S2L2L", "S2M2L", "M2L2L")
DESK_ORDERS = (3, 5, 10)
FULL_ORDERS = (3, 5, 10, 15, 20)
DEFAULT_SAMPLES = 200
TARGET_COUNT = 64
BOUNDARY_TARGETS = 30
MAX_ATTEMPTS = 1000
UNDERFLOW_GUARD = 1e-280
VIOLATION_SLACK = 1.02
HYPOTHESIS_RTOL = 1e-12
CSV_COLUMNS = ("chain", "p", "q", "samples", "max_ratio", "mean_ratio", "seed")
CONFIG_KEYS = frozenset(
    ["chains", "orders", "samples_per_cell", "seed", "size_scale", "output_path", "format"])


class SamplingError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


def _vec(v) -> tuple[float, float, float]:
    return tuple(float(x) for x in as_vec3(v))


@dataclass(frozen=True)
class ScenarioSample:
    """One admissible geometry for a chain; vectors are stored as float tuples."""

    chain: str
    geometry: bounds.ChainGeometry
    source: tuple
    centers: tuple  # (c,) or (c, c')
    target_set: tuple  # tuple of 3-tuples
    orders: tuple | None = None

    @property
    def final_center(self) -> np.ndarray:
        return np.array(self.centers[-1])

    @property
    def target_radius(self) -> float:
        """Radius of the closed ball that must contain the targets."""
        g, c = self.geometry, np.array(self.centers[0])
        if self.chain == "S2L2L":
            return g.r - float(np.linalg.norm(c))
        if self.chain == "S2M2L":
            return float(np.linalg.norm(c)) - g.R
        return g.r_prime - float(np.linalg.norm(c - np.array(self.centers[1])))

    def targets(self) -> np.ndarray:
        return np.array(self.target_set, dtype=float).reshape(-1, 3)

    def check(self) -> None:
        """Raise GeometryError unless the chain's hypotheses hold."""
        g = self.geometry
        tol = HYPOTHESIS_RTOL * max(g.R, 1.0)
        s_norm = float(np.linalg.norm(self.source))
        c = np.array(self.centers[0])
        c_norm = float(np.linalg.norm(c))
        if self.chain == "S2L2L":
            ok = s_norm >= g.R - tol and c_norm <= g.r + tol and len(self.centers) == 1
        elif self.chain == "S2M2L":
            ok = s_norm <= g.r + tol and c_norm >= g.R - tol and len(self.centers) == 1
        elif self.chain == "M2L2L":
            g.check_compatible(c_norm)
            ok = s_norm <= g.r + tol and len(self.centers) == 2
        else:
            raise ValueError(f"unknown chain {self.chain!r}")
        if not ok:
            raise GeometryError(f"{self.chain} sample violates its hypotheses")
        radius = self.target_radius
        if not radius >= 0:
            raise GeometryError("target ball has negative radius")
        d = np.linalg.norm(self.targets() - self.final_center, axis=1)
        if np.any(d > radius + tol):
            raise GeometryError("target outside the final ball")

    def to_dict(self) -> dict:
        return {
            "chain": self.chain,
            "geometry": dataclasses.asdict(self.geometry),
            "source": list(self.source),
            "centers": [list(c) for c in self.centers],
            "target_set": [list(t) for t in self.target_set],
            "orders": None if self.orders is None else list(self.orders),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSample":
        return cls(
            d["chain"],
            bounds.ChainGeometry(**d["geometry"]),
            tuple(d["source"]),
            tuple(tuple(c) for c in d["centers"]),
            tuple(tuple(t) for t in d["target_set"]),
            None if d["orders"] is None else tuple(d["orders"]),
        )


# {{{ sampling

def _direction(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(3)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm


def _sphere_points(unit_square: np.ndarray) -> np.ndarray:
    """Area-preserving map of [0,1]^2 points onto the unit sphere."""
    z = 2 * unit_square[:, 0] - 1
    phi = 2 * np.pi * unit_square[:, 1]
    s = np.sqrt(np.clip(1 - z * z, 0, None))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def _target_set(center: np.ndarray, radius: float, toward: np.ndarray,
                rng: np.random.Generator) -> np.ndarray:
    """Center, boundary points facing toward and away from ``toward``,
    quasi-random boundary points and quasi-random interior points."""
    axis = toward - center
    norm = np.linalg.norm(axis)
    axis = axis / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
    special = [center, center + radius * axis, center - radius * axis]
    c_norm = np.linalg.norm(center)
    if c_norm > 0:
        special.append(center + radius * center / c_norm)
    special = np.array(special)
    n_interior = TARGET_COUNT - len(special) - BOUNDARY_TARGETS
    seed = int(rng.integers(2**32))
    surface = qmc.Halton(d=2, scramble=True, seed=seed).random(BOUNDARY_TARGETS)
    boundary = center + radius * _sphere_points(surface)
    ball = qmc.Halton(d=3, scramble=True, seed=seed + 1).random(n_interior)
    interior = center + (radius * np.cbrt(ball[:, :1])) * _sphere_points(ball[:, 1:])
    return np.concatenate([special, boundary, interior])


def _draw(chain: str, rng: np.random.Generator, size_scale: float) -> ScenarioSample:
    R = rng.uniform(1.5, 4.0) * size_scale
    r = rng.uniform(0.5, 0.9) * R
    if chain == "S2L2L":
        geometry = bounds.ChainGeometry(R, r)
        s = rng.uniform(R, 1.25 * R) * _direction(rng)
        c = rng.uniform(0, 0.9 * r) * _direction(rng)
        centers = (c,)
        radius = r - np.linalg.norm(c)
    elif chain == "S2M2L":
        geometry = bounds.ChainGeometry(R, r)
        s = rng.uniform(0, r) * _direction(rng)
        c = rng.uniform(R, 1.5 * R) * _direction(rng)
        centers = (c,)
        radius = np.linalg.norm(c) - R
    elif chain == "M2L2L":
        r2 = rng.uniform(0.3, 0.9) * R
        geometry = bounds.ChainGeometry(R, r, R + r2 - r, r2)
        s = rng.uniform(0, r) * _direction(rng)
        c = (R + r2) * _direction(rng)
        c2 = c + rng.uniform(0, 0.9 * r2) * _direction(rng)
        centers = (c, c2)
        radius = r2 - np.linalg.norm(c - c2)
    else:
        raise ValueError(f"unknown chain {chain!r}; expected one of {CHAINS}")
    targets = _target_set(centers[-1], float(radius), s, rng)
    return ScenarioSample(chain, geometry, _vec(s), tuple(_vec(x) for x in centers),
                          tuple(_vec(t) for t in targets))


def sample_scenario(chain: str, rng_seed, size_scale: float = 1.0) -> ScenarioSample:
    """Draw an admissible geometry for ``chain``.

    ``rng_seed`` may be an integer, a SeedSequence or a Generator; a
    Generator is advanced in place.
    """
    if chain not in CHAINS:
        raise ValueError(f"unknown chain {chain!r}; expected one of {CHAINS}")
    if not size_scale > 0:
        raise ValueError("size_scale must be positive")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    for _ in range(MAX_ATTEMPTS):
        sample = _draw(chain, rng, size_scale)
        try:
            sample.check()
        except GeometryError:
            continue
        return sample
    raise SamplingError(f"no admissible {chain} sample after {MAX_ATTEMPTS} attempts")

# }}}


# {{{ measurement

def chain_bound(sample: ScenarioSample, p: int) -> float:
    g = sample.geometry
    if sample.chain == "S2L2L":
        return bounds.bound_chain_s2l2l(g, p)
    if sample.chain == "S2M2L":
        return bounds.bound_chain_s2m2l(g, p)
    return bounds.bound_chain_m2l2l(g, p)


def chain_expansion(sample: ScenarioSample, p: int, q: int, weight: float = 1.0):
    """The q-th order local expansion produced by the sample's translation chain."""
    g, s = sample.geometry, sample.source
    c = sample.centers[0]
    if sample.chain == "S2L2L":
        first = s2l(s, weight, np.zeros(3), p, radius=g.r)
        return l2l(first, c, q, radius=max(sample.target_radius, 0.0) or None)
    first = s2m(s, weight, np.zeros(3), p, radius=g.r)
    if sample.chain == "S2M2L":
        return m2l(first, c, q, radius=max(sample.target_radius, 0.0) or None)
    mid = m2l(first, c, p, radius=g.r_prime)
    return l2l(mid, sample.centers[1], q, radius=max(sample.target_radius, 0.0) or None)


def reference_expansion(sample: ScenarioSample, q: int, weight: float = 1.0):
    radius = sample.target_radius
    return s2l(sample.source, weight, sample.final_center, q,
               radius=radius if radius > 0 else None)


def measure_error(sample: ScenarioSample, p: int, q: int, weight: float = 1.0) -> float:
    """max over the target set of |L^q[phi](t) - L^q[chain_p[phi]](t)|."""
    targets = sample.targets()
    approx = eval_expansion(chain_expansion(sample, p, q, weight), targets)
    exact = eval_expansion(reference_expansion(sample, q, weight), targets)
    return float(np.max(np.abs(np.real(exact - approx))))

# }}}


# {{{ constant estimation

@dataclass(frozen=True)
class CellResult:
    p: int
    q: int
    samples: int
    max_ratio: float
    mean_ratio: float
    discarded: int = 0


@dataclass(frozen=True)
class ConstantReport:
    chain: str
    orders: tuple
    samples: int
    max_ratio: float
    mean_ratio: float
    worst_sample: ScenarioSample | None
    seed: int
    cells: tuple = field(default=())
    discarded: int = 0

    def __post_init__(self):
        if not self.max_ratio >= self.mean_ratio >= 0:
            raise ValueError("need max_ratio >= mean_ratio >= 0")

    def to_dict(self) -> dict:
        return {
            "chain": self.chain,
            "orders": list(self.orders),
            "samples": self.samples,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "worst_sample": None if self.worst_sample is None else self.worst_sample.to_dict(),
            "seed": self.seed,
            "cells": [dataclasses.asdict(c) for c in self.cells],
            "discarded": self.discarded,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstantReport":
        worst = d.get("worst_sample")
        return cls(
            chain=d["chain"],
            orders=tuple(d["orders"]),
            samples=int(d["samples"]),
            max_ratio=float(d["max_ratio"]),
            mean_ratio=float(d["mean_ratio"]),
            worst_sample=None if worst is None else ScenarioSample.from_dict(worst),
            seed=int(d["seed"]),
            cells=tuple(CellResult(**c) for c in d.get("cells", [])),
            discarded=int(d.get("discarded", 0)),
        )


def cell_rng(seed: int, chain: str, p: int, q: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, CHAINS.index(chain), p, q]))


def run_cell(chain: str, p: int, q: int, samples_per_cell: int, seed: int,
             size_scale: float = 1.0):
    """Ratios error/bound for one (p, q) cell; returns (ratios, samples, discarded)."""
    rng = cell_rng(seed, chain, p, q)
    ratios, kept, discarded = [], [], 0
    for _ in range(samples_per_cell):
        sample = dataclasses.replace(sample_scenario(chain, rng, size_scale), orders=(p, q))
        bound = chain_bound(sample, p)
        if bound < UNDERFLOW_GUARD:
            discarded += 1
            continue
        ratios.append(measure_error(sample, p, q) / bound)
        kept.append(sample)
    return np.array(ratios), kept, discarded


def estimate_constant(chain: str, order_set: Sequence[int] = DESK_ORDERS,
                      samples_per_cell: int = DEFAULT_SAMPLES, seed: int = 0,
                      size_scale: float = 1.0) -> ConstantReport:
    """Worst error/bound ratio over (p, q) in order_set x order_set."""
    if samples_per_cell < 1:
        raise ValueError("samples_per_cell must be at least 1")
    order_set = tuple(sorted(set(int(o) for o in order_set)))
    if not order_set:
        raise ValueError("order set is empty")
    cells, all_ratios = [], []
    worst, worst_ratio, discarded = None, -1.0, 0
    for p in order_set:
        for q in order_set:
            ratios, kept, n_disc = run_cell(chain, p, q, samples_per_cell, seed, size_scale)
            discarded += n_disc
            if ratios.size:
                i = int(np.argmax(ratios))
                if ratios[i] > worst_ratio:
                    worst, worst_ratio = kept[i], float(ratios[i])
                cells.append(CellResult(p, q, int(ratios.size), float(ratios.max()),
                                        float(ratios.mean()), n_disc))
            else:
                cells.append(CellResult(p, q, 0, 0.0, 0.0, n_disc))
            all_ratios.append(ratios)
    ratios = np.concatenate(all_ratios)
    return ConstantReport(
        chain=chain,
        orders=order_set,
        samples=samples_per_cell,
        max_ratio=float(ratios.max()) if ratios.size else 0.0,
        mean_ratio=float(ratios.mean()) if ratios.size else 0.0,
        worst_sample=worst,
        seed=int(seed),
        cells=tuple(cells),
        discarded=discarded,
    )

# }}}


# {{{ reports and configuration

def _fmt(x: float) -> str:
    return format(x, ".17g")


def reports_to_csv(reports: Sequence[ConstantReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in sorted(reports, key=lambda r: CHAINS.index(r.chain)):
        for cell in sorted(rep.cells, key=lambda c: (c.p, c.q)):
            writer.writerow([rep.chain, cell.p, cell.q, cell.samples,
                             _fmt(cell.max_ratio), _fmt(cell.mean_ratio), rep.seed])
    return buf.getvalue()


def reports_to_json(reports: Sequence[ConstantReport]) -> str:
    payload = [r.to_dict() for r in sorted(reports, key=lambda r: CHAINS.index(r.chain))]
    return json.dumps(payload if len(payload) != 1 else payload[0], indent=2) + "\n"


def write_report(report, path, format: str = "csv") -> None:
    """Write one report, or a list of reports, as CSV or JSON."""
    reports = [report] if isinstance(report, ConstantReport) else list(report)
    if format == "csv":
        text = reports_to_csv(reports)
    elif format == "json":
        text = reports_to_json(reports)
    else:
        raise ValueError(f"unknown report format {format!r}")
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_json_reports(path) -> list[ConstantReport]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return [ConstantReport.from_dict(d) for d in data]


@dataclass(frozen=True)
class ExperimentConfig:
    chains: tuple = CHAINS
    orders: tuple = DESK_ORDERS
    samples_per_cell: int = DEFAULT_SAMPLES
    seed: int = 0
    size_scale: float = 1.0
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if not self.chains:
            raise ConfigError("chain list is empty")
        bad = [c for c in self.chains if c not in CHAINS]
        if bad:
            raise ConfigError(f"unknown chains {bad}; expected a subset of {list(CHAINS)}")
        if not self.orders or any(int(o) != o or o < 0 for o in self.orders):
            raise ConfigError("orders must be a non-empty list of non-negative integers")
        if int(self.samples_per_cell) != self.samples_per_cell or self.samples_per_cell < 1:
            raise ConfigError("samples_per_cell must be a positive integer")
        if not (isinstance(self.size_scale, (int, float)) and self.size_scale > 0
                and math.isfinite(self.size_scale)):
            raise ConfigError("size_scale must be a positive number")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        for key in ("chains", "orders"):
            if key in kw:
                if not isinstance(kw[key], list):
                    raise ConfigError(f"{key} must be a list")
                kw[key] = tuple(kw[key])
        if "seed" in kw and (not isinstance(kw["seed"], int) or kw["seed"] < 0):
            raise ConfigError("seed must be a non-negative integer")
        return cls(**kw)


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def run_config(config: ExperimentConfig) -> list[ConstantReport]:
    reports = [estimate_constant(chain, config.orders, config.samples_per_cell,
                                 config.seed, config.size_scale)
               for chain in sorted(config.chains, key=CHAINS.index)]
    if config.output_path:
        write_report(reports, config.output_path, config.format)
    return reports

# }}}
