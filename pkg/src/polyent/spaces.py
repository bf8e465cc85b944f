"""Compact base spaces: the unit interval, the circle R/Z, and max-metric products.

Points are plain tuples of floats. Circle coordinates live in [0, 1) and the
circle has circumference 1, so a single mesh parameter controls both kinds of
grid. Products carry the max metric.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError

Point = tuple[float, ...]

INTERVAL_KIND = "interval"
CIRCLE_KIND = "circle"
PRODUCT_KIND = "product"


@dataclass(frozen=True)
class SpaceDescriptor:
    kind: str
    factors: tuple["SpaceDescriptor", ...] = ()

    def __post_init__(self):
        if self.kind == PRODUCT_KIND:
            if len(self.factors) < 2:
                raise InputError("a product space needs at least 2 factors")
        elif self.kind in (INTERVAL_KIND, CIRCLE_KIND):
            if self.factors:
                raise InputError(f"{self.kind} takes no factors")
        else:
            raise InputError(f"unknown space kind {self.kind!r}")

    @property
    def dimension(self) -> int:
        if self.kind == PRODUCT_KIND:
            return sum(f.dimension for f in self.factors)
        return 1

    @property
    def periodic(self) -> tuple[bool, ...]:
        """Per-coordinate wraparound flags (True for circle coordinates)."""
        if self.kind == PRODUCT_KIND:
            return tuple(itertools.chain.from_iterable(f.periodic for f in self.factors))
        return (self.kind == CIRCLE_KIND,)

    def __str__(self):
        if self.kind == PRODUCT_KIND:
            return "(" + " x ".join(str(f) for f in self.factors) + ")"
        return self.kind


INTERVAL = SpaceDescriptor(INTERVAL_KIND)
CIRCLE = SpaceDescriptor(CIRCLE_KIND)


def product_space(factors: Sequence[SpaceDescriptor]) -> SpaceDescriptor:
    """Max-metric product of two or more spaces."""
    factors = tuple(factors)
    if len(factors) < 2:
        raise InputError(f"product_space needs >= 2 factors, got {len(factors)}")
    return SpaceDescriptor(PRODUCT_KIND, factors)


def power_space(space: SpaceDescriptor, n: int) -> SpaceDescriptor:
    """The n-fold product X x ... x X (returns ``space`` itself for n == 1)."""
    if n < 1:
        raise InputError("power_space needs n >= 1")
    return space if n == 1 else product_space([space] * n)


def make_point(space: SpaceDescriptor, coords: Sequence[float]) -> Point:
    """Validate coordinates and reduce circle coordinates into [0, 1)."""
    coords = tuple(float(c) for c in coords)
    if len(coords) != space.dimension:
        raise InputError(f"point {coords} has dimension {len(coords)}, space {space} has {space.dimension}")
    out = []
    for c, per in zip(coords, space.periodic):
        if per:
            c = c % 1.0
            if c >= 1.0:  # -tiny % 1.0 rounds up to 1.0
                c = 0.0
        elif not 0.0 <= c <= 1.0:
            raise InputError(f"interval coordinate {c} outside [0, 1]")
        out.append(c)
    return tuple(out)


def _check_dims(space: SpaceDescriptor, *points: Sequence[float]) -> None:
    for p in points:
        if len(p) != space.dimension:
            raise InputError(f"point {tuple(p)} does not belong to {space} (dimension {space.dimension})")


def base_distance(space: SpaceDescriptor, p: Sequence[float], q: Sequence[float]) -> float:
    """Ground metric: |x - y| on the interval, arc length on the circle, max over factors."""
    _check_dims(space, p, q)
    best = 0.0
    for a, b, per in zip(p, q, space.periodic):
        d = abs(a - b)
        if per:
            d = d % 1.0
            d = min(d, 1.0 - d)
        if d > best:
            best = d
    return best


def coord_distance(a: np.ndarray, b: np.ndarray, periodic: Sequence[bool]) -> np.ndarray:
    """Vectorized ground metric over the trailing coordinate axis."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    per = np.asarray(periodic, dtype=bool)
    if per.any():
        w = d % 1.0
        w = np.minimum(w, 1.0 - w)
        d = np.where(per, w, d)
    return d.max(axis=-1)


def wrap_coords(x: np.ndarray, periodic: Sequence[bool]) -> np.ndarray:
    """Reduce periodic coordinates of an (..., dim) array into [0, 1)."""
    per = np.asarray(periodic, dtype=bool)
    if not per.any():
        return x
    w = np.mod(x, 1.0)
    w = np.where(w >= 1.0, 0.0, w)
    return np.where(per, w, x)


@dataclass(frozen=True)
class SampleGrid:
    space: SpaceDescriptor
    points: tuple[Point, ...]
    mesh: float

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(len(self.points), self.space.dimension)


def _axis_points(space: SpaceDescriptor, mesh: float) -> list[float]:
    # spacing 1/k <= mesh, so every point is within mesh/2 of the grid
    k = max(1, math.ceil(1.0 / mesh - 1e-9))
    if space.kind == INTERVAL_KIND:
        return [i / k for i in range(k + 1)]
    return [i / k for i in range(k)]


def build_grid(space: SpaceDescriptor, mesh: float) -> SampleGrid:
    """Uniform tensor grid with spacing at most ``mesh``, in lexicographic order."""
    if not mesh > 0:
        raise InputError(f"mesh must be positive, got {mesh}")
    if space.kind == PRODUCT_KIND:
        axes = []
        for factor in space.factors:
            axes.append(build_grid(factor, mesh).points)
        pts = [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*axes)]
    else:
        pts = [(x,) for x in _axis_points(space, mesh)]
    pts.sort()
    return SampleGrid(space, tuple(pts), float(mesh))


def nearest_grid_distance(grid: SampleGrid, probes: np.ndarray) -> np.ndarray:
    """Distance from each probe point (rows) to its nearest grid point."""
    g = grid.as_array()
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    out = np.empty(len(probes))
    for i in range(0, len(probes), 256):
        block = probes[i:i + 256]
        d = coord_distance(block[:, None, :], g[None, :, :], grid.space.periodic)
        out[i:i + 256] = d.min(axis=1)
    return out


def random_points(space: SpaceDescriptor, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random points as a (count, dim) array (circle coordinates in [0, 1))."""
    return rng.random((count, space.dimension))
