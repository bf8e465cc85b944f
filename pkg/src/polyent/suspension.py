"""Symmetric product suspensions SF_n^m(X) = F_n(X) / F_m(X).

The quotient is metrized by the collapse metric

    d_q([A], [B]) = min(d_H(A, B), r_m(A) + r_m(B)),   d_q([A], F_X) = r_m(A),

where r_m(A) is the Hausdorff distance from A to F_m(X). r_m is computed
exactly: the minimum over partitions of A into at most m blocks of the largest
block Chebyshev radius.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import InputError, InvariantError
from .hyperspace import FinSet, HyperGrid, hausdorff_distance, induced_map_F
from .maps import MapSystem, make_power
from .spaces import SpaceDescriptor

# ---------------------------------------------------------------------------
# Chebyshev radius and distance to F_m
# ---------------------------------------------------------------------------


def _axis_radius(x: np.ndarray, periodic: bool) -> np.ndarray:
    """Chebyshev radius of point groups along the last axis (one coordinate)."""
    if not periodic:
        return 0.5 * (x.max(axis=-1) - x.min(axis=-1))
    s = np.sort(np.mod(x, 1.0), axis=-1)
    gaps = np.diff(s, axis=-1)
    wrap = 1.0 - (s[..., -1] - s[..., 0])
    if gaps.shape[-1]:
        wrap = np.maximum(wrap, gaps.max(axis=-1))
    # the shortest covering arc is the complement of the largest gap
    return np.maximum(0.0, 0.5 * (1.0 - wrap))


def chebyshev_radius_array(pts: np.ndarray, periodic: Sequence[bool]) -> np.ndarray:
    """Radius of the smallest ball covering each group: pts has shape (..., k, dim)."""
    radii = [_axis_radius(pts[..., d], per) for d, per in enumerate(periodic)]
    return np.max(np.stack(radii, axis=0), axis=0)


def chebyshev_radius(space: SpaceDescriptor, points: Sequence[Sequence[float]]) -> float:
    pts = np.asarray(points, dtype=float).reshape(len(points), space.dimension)
    return float(chebyshev_radius_array(pts, space.periodic))


def set_partitions(k: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length k using at most ``max_blocks`` labels."""
    if k == 0:
        yield ()
        return
    labels = [0] * k

    def rec(i: int, used: int):
        if i == k:
            yield tuple(labels)
            return
        for b in range(min(used + 1, max_blocks)):
            labels[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(1, 1)


@lru_cache(maxsize=None)
def _partition_blocks(k: int, m: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    out = []
    for rgs in set_partitions(k, m):
        blocks = {}
        for pos, lab in enumerate(rgs):
            blocks.setdefault(lab, []).append(pos)
        out.append(tuple(tuple(b) for b in blocks.values()))
    return tuple(out)


def dist_to_Fm_array(pts: np.ndarray, periodic: Sequence[bool], m: int) -> np.ndarray:
    """Vectorized distance to F_m over padded point groups of shape (..., k, dim)."""
    if m < 1:
        raise InputError("dist_to_Fm needs m >= 1")
    k = pts.shape[-2]
    if k <= m:
        return np.zeros(pts.shape[:-2])
    best = None
    for blocks in _partition_blocks(k, m):
        worst = None
        for block in blocks:
            if len(block) == 1:
                continue
            r = chebyshev_radius_array(pts[..., list(block), :], periodic)
            worst = r if worst is None else np.maximum(worst, r)
        if worst is None:
            worst = np.zeros(pts.shape[:-2])
        best = worst if best is None else np.minimum(best, worst)
    return best


def dist_to_Fm(space: SpaceDescriptor, A: FinSet, m: int) -> float:
    """Hausdorff distance from A to the nearest set with at most m points."""
    if m < 1:
        raise InputError("dist_to_Fm needs m >= 1")
    if len(A) <= m:
        return 0.0
    pts = np.array(A.elements, dtype=float).reshape(len(A), space.dimension)
    return float(dist_to_Fm_array(pts, space.periodic, m))


# ---------------------------------------------------------------------------
# Points of the suspension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuspPoint:
    space: SpaceDescriptor
    m_bound: int
    n_bound: int
    payload: FinSet | None = None  # None is the collapsed class F_X

    def __post_init__(self):
        if not self.n_bound > self.m_bound >= 1:
            raise InputError(f"suspension needs n > m >= 1, got n={self.n_bound}, m={self.m_bound}")
        if self.payload is not None and len(self.payload) <= self.m_bound:
            raise InputError(f"class payload has {len(self.payload)} <= m={self.m_bound} points")

    @property
    def collapsed(self) -> bool:
        return self.payload is None

    def __repr__(self):
        if self.payload is None:
            return "Collapsed"
        return f"Class({list(self.payload.elements)})"


def collapsed_point(space: SpaceDescriptor, n: int, m: int = 1) -> SuspPoint:
    return SuspPoint(space, m, n, None)


@dataclass(frozen=True)
class SuspGrid:
    members: tuple[SuspPoint, ...]

    def __len__(self):
        return len(self.members)


def _same_suspension(p: SuspPoint, q: SuspPoint) -> None:
    if (p.space, p.m_bound, p.n_bound) != (q.space, q.m_bound, q.n_bound):
        raise InputError("suspension points come from different quotients")


def susp_distance(p: SuspPoint, q2: SuspPoint) -> float:
    """Collapse metric on SF_n^m(X)."""
    _same_suspension(p, q2)
    if p.collapsed and q2.collapsed:
        return 0.0
    space, m = p.space, p.m_bound
    if p.collapsed:
        return dist_to_Fm(space, q2.payload, m)
    if q2.collapsed:
        return dist_to_Fm(space, p.payload, m)
    via = dist_to_Fm(space, p.payload, m) + dist_to_Fm(space, q2.payload, m)
    return min(hausdorff_distance(space, p.payload, q2.payload), via)


def quotient_q(A: FinSet, m: int, space: SpaceDescriptor, n: int | None = None) -> SuspPoint:
    """q: F_n(X) -> SF_n^m(X); sets with at most m points collapse to F_X."""
    n = A.n_bound if n is None else n
    if len(A) <= m:
        return SuspPoint(space, m, n, None)
    return SuspPoint(space, m, n, A)


def induced_map_S(f: MapSystem, p: SuspPoint) -> SuspPoint:
    """SF_n^m(f): F_X is fixed, a class [A] goes to [f(A)]."""
    if p.collapsed:
        return p
    img = induced_map_F(f, p.payload)
    if len(img) != len(p.payload):
        raise InvariantError(f"{f.label} merged points of {p.payload.elements}; not injective")
    return SuspPoint(p.space, p.m_bound, p.n_bound, img)


def susp_grid(h: HyperGrid, m: int) -> SuspGrid:
    """Classes of all hyper-grid members with more than m points, plus F_X."""
    if not 1 <= m < h.n_bound:
        raise InputError(f"susp_grid needs 1 <= m < n={h.n_bound}, got m={m}")
    space = h.base.space
    members = [SuspPoint(space, m, h.n_bound, None)]
    members += [SuspPoint(space, m, h.n_bound, A) for A in h.members if len(A) > m]
    return SuspGrid(tuple(members))


def iterate_identity_check(f: MapSystem, k: int, probes: Sequence[SuspPoint]) -> bool:
    """True iff (SF(f))^k and SF(f^k) agree exactly on every probe."""
    if k < 1:
        raise InputError("iterate_identity_check needs k >= 1")
    fk = make_power(f, k)
    for p in probes:
        lhs = p
        for _ in range(k):
            lhs = induced_map_S(f, lhs)
        if lhs != induced_map_S(fk, p):
            return False
    return True


def fixed_points_of_induced_S(f: MapSystem, grid: SuspGrid, tol: float = 0.0) -> list[SuspPoint]:
    """Members p of the grid with d_q(SF(f)(p), p) <= tol."""
    return [p for p in grid.members if susp_distance(induced_map_S(f, p), p) <= tol]
