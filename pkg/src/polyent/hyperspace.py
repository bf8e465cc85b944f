"""The n-fold symmetric product F_n(X) with the Hausdorff metric.

A :class:`FinSet` is a canonical, exactly-deduplicated sorted tuple of points.
Because deduplication is exact, the semiconjugacy
``project_pi(f^{x n}(t)) == induced_map_F(f, project_pi(t))`` holds bit for bit.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, ResourceError
from .maps import MapSystem
from .spaces import Point, SampleGrid, SpaceDescriptor, base_distance, coord_distance

DEFAULT_CAP = 200_000


def enumeration_cap() -> int:
    """The hyper-grid cap, overridable through the POLYENT_CAP environment variable."""
    raw = os.environ.get("POLYENT_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"POLYENT_CAP must be an integer, got {raw!r}") from None
    if cap < 1:
        raise InputError("POLYENT_CAP must be positive")
    return cap


@dataclass(frozen=True)
class FinSet:
    elements: tuple[Point, ...]
    n_bound: int

    def __post_init__(self):
        k = len(self.elements)
        if not 1 <= k <= self.n_bound:
            raise InputError(f"FinSet cardinality {k} outside [1, {self.n_bound}]")
        if any(a >= b for a, b in zip(self.elements, self.elements[1:])):
            raise InputError("FinSet elements must be distinct and sorted; use FinSet.of")

    @classmethod
    def of(cls, points: Iterable[Sequence[float]], n_bound: int | None = None) -> "FinSet":
        elems = tuple(sorted({tuple(float(c) for c in p) for p in points}))
        return cls(elems, len(elems) if n_bound is None else n_bound)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class HyperGrid:
    base: SampleGrid
    n_bound: int
    members: tuple[FinSet, ...]

    def __len__(self):
        return len(self.members)


def _check_space(space: SpaceDescriptor, *sets: FinSet) -> None:
    for A in sets:
        for p in A.elements:
            if len(p) != space.dimension:
                raise InputError(f"FinSet element {p} does not belong to {space}")


def hausdorff_distance(space: SpaceDescriptor, A: FinSet, B: FinSet) -> float:
    """max(max_a min_b d(a, b), max_b min_a d(a, b)) for finite sets."""
    _check_space(space, A, B)
    a = np.array(A.elements, dtype=float)
    b = np.array(B.elements, dtype=float)
    d = coord_distance(a[:, None, :], b[None, :, :], space.periodic)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def hausdorff_array(a: np.ndarray, b: np.ndarray, periodic: Sequence[bool]) -> np.ndarray:
    """Vectorized Hausdorff distance between padded multisets.

    ``a`` has shape (..., r, dim), ``b`` shape (..., s, dim); repeated rows are
    harmless because the distance only depends on the underlying sets.
    """
    d = coord_distance(a[..., :, None, :], b[..., None, :, :], periodic)
    return np.maximum(d.min(axis=-1).max(axis=-1), d.min(axis=-2).max(axis=-1))


def induced_map_F(f: MapSystem, A: FinSet) -> FinSet:
    """F_n(f)(A) = {f(a) : a in A}, re-canonicalized."""
    pts = np.array(A.elements, dtype=float).reshape(len(A), f.space.dimension)
    img = f.fwd(pts)
    return FinSet.of(img, A.n_bound)


def project_pi(t: Sequence[Sequence[float]]) -> FinSet:
    """pi(x_1, ..., x_n) = {x_1, ..., x_n}."""
    t = list(t)
    if not t:
        raise InputError("project_pi needs at least one coordinate")
    return FinSet.of(t, len(t))


def hyper_grid_size(base_size: int, n: int) -> int:
    return sum(math.comb(base_size, k) for k in range(1, min(n, base_size) + 1))


def check_cap(required: int, cap: int | None = None, what: str = "hyper-grid") -> None:
    cap = enumeration_cap() if cap is None else cap
    if required > cap:
        raise ResourceError(f"{what} needs {required} members, above the cap {cap}; "
                            f"raise it with POLYENT_CAP={required}", required=required)


def hyper_grid(base: SampleGrid, n: int, cap: int | None = None) -> HyperGrid:
    """All nonempty subsets of the base grid with at most n points."""
    if n < 1:
        raise InputError("hyper_grid needs n >= 1")
    check_cap(hyper_grid_size(len(base), n), cap)
    members = []
    for k in range(1, n + 1):
        for combo in itertools.combinations(base.points, k):
            members.append(FinSet(combo, n))
    return HyperGrid(base, n, tuple(members))


def distinct_tuple_grid(base: SampleGrid, n: int, cap: int | None = None) -> list[tuple[Point, ...]]:
    """All ordered n-tuples of pairwise distinct grid points (a sample of pi^-1(G_n))."""
    if n < 1:
        raise InputError("distinct_tuple_grid needs n >= 1")
    if n > len(base):
        raise InputError(f"cannot pick {n} distinct points from a grid of {len(base)}")
    check_cap(math.perm(len(base), n), cap, what="distinct-tuple grid")
    return list(itertools.permutations(base.points, n))


def fixed_sets_of_induced(f: MapSystem, grid: HyperGrid, tol: float = 0.0) -> list[FinSet]:
    """Members M of the grid with d_H(F_n(f)(M), M) <= tol."""
    space = grid.base.space
    return [M for M in grid.members if hausdorff_distance(space, induced_map_F(f, M), M) <= tol]


def apply_product(f: MapSystem, t: Sequence[Point]) -> tuple[Point, ...]:
    """f^{x n}(x_1, ..., x_n) = (f(x_1), ..., f(x_n))."""
    pts = np.array(t, dtype=float).reshape(len(t), f.space.dimension)
    return tuple(tuple(float(v) for v in row) for row in f.fwd(pts))


def tuple_distance(space: SpaceDescriptor, s: Sequence[Point], t: Sequence[Point]) -> float:
    """Max-metric distance on X^{x n}."""
    if len(s) != len(t):
        raise InputError("tuples of different length")
    return max(base_distance(space, a, b) for a, b in zip(s, t))
