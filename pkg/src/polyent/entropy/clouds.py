"""State clouds: finite samples of a phase space with their orbits precomputed.

An :class:`OrbitCloud` stores coordinate streams in a table. Each state owns
``r`` elements with ``dim`` streams apiece, addressed as (row, offset); the
state's coordinate at time t is ``table[row, offset + t]``. Sharing rows is
what makes transit clouds cheap: the states f^-j(a), j = 0..J, are windows of
one bi-infinite orbit of the anchor a.

Why transit clouds. On a uniform grid every orbit of a map with finite NW(f)
reaches the eps-neighbourhood of the attractors after a bounded number of
steps, so S(n, eps) stops growing once n exceeds the grid's escape time and
the log-log slope collapses to 0. The wandering part of the space is the
disjoint union of the images f^k(D) of fundamental domains D = [a, f(a)), so
sampling D at the grid mesh and then taking backward and forward shifts gives
a cloud that is dense in every wandering orbit segment that matters for the
count at depth n.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InputError
from ..hyperspace import FinSet, check_cap
from ..maps import MapSystem
from ..spaces import (
    CIRCLE_KIND,
    INTERVAL_KIND,
    SampleGrid,
    SpaceDescriptor,
    build_grid,
    product_space,
    wrap_coords,
)
from ..suspension import SuspPoint, dist_to_Fm_array
from ._kernels import KIND_POINT, KIND_SET, KIND_SUSP

KIND_NAMES = {KIND_POINT: "point", KIND_SET: "set", KIND_SUSP: "susp"}


@dataclass(eq=False)
class OrbitCloud:
    kind: int
    table: np.ndarray        # (rows, length) coordinate streams
    wrap: np.ndarray         # (rows,) True for circle coordinates
    refs: np.ndarray         # (M, r, dim, 2) stream (row, offset) per element coordinate
    horizon: int             # every state has coordinates for t < horizon
    space: SpaceDescriptor
    label: str = ""
    m: int = 0
    radius: np.ndarray | None = None     # (M, horizon) distance to F_m, susp clouds only
    collapsed: np.ndarray | None = None  # (M,) True for the collapsed class
    _sketch: tuple | None = field(default=None, repr=False)
    _peak: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.table = np.ascontiguousarray(self.table, dtype=np.float64)
        self.wrap = np.ascontiguousarray(self.wrap, dtype=np.bool_)
        self.refs = np.ascontiguousarray(self.refs, dtype=np.int64)
        if self.refs.ndim != 4 or self.refs.shape[-1] != 2:
            raise InputError("refs must have shape (M, r, dim, 2)")
        if len(self.refs) and self.refs[..., 1].max() + self.horizon > self.table.shape[1]:
            raise InputError("cloud table is shorter than offset + horizon")
        M = len(self.refs)
        if self.kind == KIND_SUSP:
            if self.radius is None or self.collapsed is None:
                raise InputError("suspension clouds need radius and collapsed arrays")
            self.radius = np.ascontiguousarray(self.radius, dtype=np.float64)
            self.collapsed = np.ascontiguousarray(self.collapsed, dtype=np.bool_)
        else:
            self.radius = np.zeros((1, 1))
            self.collapsed = np.zeros(max(M, 1), dtype=np.bool_)

    def __len__(self):
        return len(self.refs)

    @property
    def r(self) -> int:
        return self.refs.shape[1]

    @property
    def dim(self) -> int:
        return self.refs.shape[2]

    def coords(self, t: int | np.ndarray = 0) -> np.ndarray:
        """Coordinates at time t: (M, r, dim), or (M, len(t), r, dim) for an array of times."""
        rows, offs = self.refs[..., 0], self.refs[..., 1]
        if np.ndim(t) == 0:
            return self.table[rows, offs + int(t)]
        t = np.asarray(t)
        return self.table[rows[:, None], offs[:, None] + t[None, :, None, None]]

    def kernel_args(self):
        return (self.kind, self.table, self.wrap, self.refs, self.radius, self.collapsed)

    def subset(self, idx: Sequence[int]) -> "OrbitCloud":
        """Cloud restricted to the given states, in the given order."""
        idx = np.asarray(idx, dtype=np.int64)
        susp = self.kind == KIND_SUSP
        return OrbitCloud(self.kind, self.table, self.wrap, self.refs[idx], self.horizon,
                          self.space, self.label, self.m,
                          self.radius[idx] if susp else None,
                          self.collapsed[idx] if susp else None)

    def sketches(self):
        """1-Lipschitz scalar streams used to bucket candidates in the greedy kernel.

        Point clouds use their own coordinate streams. Set clouds use the
        distances d(p, A_t) to a few landmarks p. Suspension clouds use the
        radius and min(d(p, A_t), radius), both of which vanish on F_m.
        """
        if self._sketch is None:
            if self.kind == KIND_POINT:
                M = len(self)
                self._sketch = (self.table, self.wrap, self.refs.reshape(M, -1, 2))
            else:
                self._sketch = self._set_sketches()
        return self._sketch

    def peaks(self) -> np.ndarray:
        """Per state, the time of the largest one-step change of any sketch."""
        if self._peak is None:
            sk_table, sk_wrap, sk_refs = self.sketches()
            M, T = len(self), self.horizon
            out = np.zeros(M, dtype=np.int64)
            if T > 1:
                chunk = max(1, 4_000_000 // (T * sk_refs.shape[1]))
                t = np.arange(T)
                for s in range(0, M, chunk):
                    rows = sk_refs[s:s + chunk, :, 0]
                    offs = sk_refs[s:s + chunk, :, 1]
                    v = sk_table[rows[..., None], offs[..., None] + t]
                    d = np.abs(np.diff(v, axis=-1))
                    per = sk_wrap[rows][..., None]
                    d = np.where(per, np.minimum(d, 1.0 - d), d)
                    out[s:s + chunk] = d.max(axis=1).argmax(axis=-1)
            self._peak = out
        return self._peak

    def _set_sketches(self):
        M, T = len(self), self.horizon
        per = np.array(self.space.periodic)
        marks = _landmarks(per)
        streams = []
        chunk = max(1, 2_000_000 // max(1, T * self.r * self.dim))
        for p in marks:
            out = np.empty((M, T))
            for s in range(0, M, chunk):
                c = self.subset(np.arange(s, min(M, s + chunk))).coords(np.arange(T))
                d = np.abs(c - p)
                d = np.where(per, np.minimum(d % 1.0, 1.0 - d % 1.0), d).max(axis=-1)
                out[s:s + chunk] = d.min(axis=-1)
            streams.append(out)
        if self.kind == KIND_SUSP:
            rad = np.where(self.collapsed[:, None], 0.0, self.radius)
            streams = [rad] + [np.minimum(s, rad) for s in streams]
            # the collapsed class sits at distance 0 from F_m for every landmark
            for s in streams:
                s[self.collapsed] = 0.0
        F = len(streams)
        sk_table = np.stack(streams, axis=1).reshape(M * F, T)
        sk_refs = np.zeros((M, F, 2), dtype=np.int64)
        sk_refs[:, :, 0] = np.arange(M * F).reshape(M, F)
        return (np.ascontiguousarray(sk_table), np.zeros(M * F, dtype=np.bool_), sk_refs)


def _landmarks(per: np.ndarray) -> list[np.ndarray]:
    dim = len(per)
    marks = [np.zeros(dim), np.full(dim, 0.5)]
    if not per.all():
        marks.append(np.where(per, 0.0, 1.0))
    return marks


# ---------------------------------------------------------------------------
# Builders from explicit states
# ---------------------------------------------------------------------------


class _TableBuilder:
    """Accumulates orbit rows for distinct start points, one row per coordinate."""

    def __init__(self, f: MapSystem, horizon: int):
        self.f = f
        self.horizon = horizon
        self.index: dict[tuple, int] = {}
        self.starts: list[tuple] = []

    def point(self, p) -> int:
        key = tuple(float(c) for c in p)
        if key not in self.index:
            self.index[key] = len(self.starts)
            self.starts.append(key)
        return self.index[key]

    def build(self):
        f, T = self.f, self.horizon
        dim = f.space.dimension
        x = np.array(self.starts, dtype=float).reshape(len(self.starts), dim)
        orb = np.empty((len(x), T, dim))
        for t in range(T):
            orb[:, t] = x
            if t + 1 < T:
                x = f.fwd(x)
        table = orb.transpose(0, 2, 1).reshape(len(orb) * dim, T)
        wrap = np.tile(np.array(f.space.periodic), len(orb))
        return table, wrap

    def refs_for(self, point_ids: np.ndarray) -> np.ndarray:
        """(M, r) point ids -> (M, r, dim, 2) stream refs at offset 0."""
        dim = self.f.space.dimension
        refs = np.zeros(point_ids.shape + (dim, 2), dtype=np.int64)
        refs[..., 0] = point_ids[..., None] * dim + np.arange(dim)
        return refs


def cloud_from_points(f: MapSystem, points: Sequence[Sequence[float]], horizon: int,
                      label: str | None = None) -> OrbitCloud:
    """Point cloud with explicit forward orbits, in the given order."""
    b = _TableBuilder(f, horizon)
    ids = np.array([[b.point(p)] for p in points], dtype=np.int64).reshape(len(points), 1)
    table, wrap = b.build()
    return OrbitCloud(KIND_POINT, table, wrap, b.refs_for(ids), horizon, f.space, label or f.label)


def cloud_from_tuples(f: MapSystem, tuples: Sequence[Sequence[Sequence[float]]], horizon: int,
                      label: str | None = None) -> OrbitCloud:
    """Cloud on X^n: each state is an ordered tuple of points, product metric."""
    b = _TableBuilder(f, horizon)
    ids = np.array([[b.point(p) for p in t] for t in tuples], dtype=np.int64)
    table, wrap = b.build()
    return OrbitCloud(KIND_POINT, table, wrap, b.refs_for(ids), horizon, f.space, label or f.label)


def _padded_ids(b: _TableBuilder, sets: Sequence[FinSet], r: int) -> np.ndarray:
    rows = []
    for A in sets:
        ids = [b.point(p) for p in A.elements]
        rows.append(ids + [ids[-1]] * (r - len(ids)))
    return np.array(rows, dtype=np.int64).reshape(len(sets), r)


def cloud_from_finsets(f: MapSystem, sets: Sequence[FinSet], horizon: int,
                       label: str | None = None) -> OrbitCloud:
    """Cloud on F_n(X) with the Hausdorff metric, in the given order."""
    if not sets:
        raise InputError("empty set cloud")
    r = max(len(A) for A in sets)
    b = _TableBuilder(f, horizon)
    ids = _padded_ids(b, sets, r)
    table, wrap = b.build()
    return OrbitCloud(KIND_SET, table, wrap, b.refs_for(ids), horizon, f.space, label or f.label)


def cloud_from_susp(f: MapSystem, points: Sequence[SuspPoint], horizon: int,
                    label: str | None = None) -> OrbitCloud:
    """Cloud on SF_n^m(X) with the collapse metric, in the given order."""
    if not points:
        raise InputError("empty suspension cloud")
    m = points[0].m_bound
    live = [p.payload for p in points if not p.collapsed]
    r = max([len(A) for A in live], default=1)
    b = _TableBuilder(f, horizon)
    anchor = live[0].elements[0] if live else (0.0,) * f.space.dimension
    sets = [p.payload if not p.collapsed else FinSet((anchor,), r) for p in points]
    ids = _padded_ids(b, sets, r)
    table, wrap = b.build()
    refs = b.refs_for(ids)
    collapsed = np.array([p.collapsed for p in points])
    cloud = OrbitCloud(KIND_SET, table, wrap, refs, horizon, f.space, label or f.label)
    radius = _radius(cloud, m)
    radius[collapsed] = 0.0
    return OrbitCloud(KIND_SUSP, table, wrap, refs, horizon, f.space, label or f.label, m,
                      radius, collapsed)


def _radius(cloud: OrbitCloud, m: int) -> np.ndarray:
    """Distance to F_m along every orbit, (M, horizon)."""
    M, T = len(cloud), cloud.horizon
    out = np.empty((M, T))
    chunk = max(1, 1_000_000 // max(1, T * cloud.r * cloud.dim))
    for s in range(0, M, chunk):
        part = cloud.subset(np.arange(s, min(M, s + chunk)))
        out[s:s + chunk] = dist_to_Fm_array(part.coords(np.arange(T)), cloud.space.periodic, m)
    return out


# ---------------------------------------------------------------------------
# Grid and transit clouds
# ---------------------------------------------------------------------------


def grid_cloud(f: MapSystem, grid: SampleGrid, horizon: int) -> OrbitCloud:
    """Forward orbits of every grid point."""
    return cloud_from_points(f, grid.points, horizon, label=f.label)


def _grid_steps(mesh: float) -> int:
    if not mesh > 0:
        raise InputError(f"mesh must be positive, got {mesh}")
    return max(1, math.ceil(1.0 / mesh - 1e-9))


def _arcs(f: MapSystem) -> list[tuple[float, float]]:
    fixed = sorted(p[0] for p in f.declared_fixed)
    kind = f.space.kind
    if kind == INTERVAL_KIND:
        if not fixed or fixed[0] != 0.0 or fixed[-1] != 1.0:
            raise InputError(f"{f.label}: transit clouds need an increasing interval map fixing 0 and 1")
        return list(zip(fixed[:-1], fixed[1:]))
    if kind == CIRCLE_KIND:
        if not fixed:
            raise InputError(f"{f.label}: transit clouds need declared fixed points on the circle")
        return list(zip(fixed, fixed[1:] + [fixed[0] + 1.0]))
    raise InputError(f"no transit cloud for {f.space}")


def _lift_image(f: MapSystem, a: float) -> float:
    y = f.forward((a % 1.0 if f.space.kind == CIRCLE_KIND else a,))[0]
    if f.space.kind == CIRCLE_KIND:
        return a + ((y - a + 0.5) % 1.0 - 0.5)
    return y


def fundamental_anchors(f: MapSystem, mesh: float) -> list[float]:
    """Grid points of a fundamental domain [a, f(a)) in every wandering arc.

    ``a`` is the grid point nearest to the middle of the arc; if the mesh is
    too coarse to put a grid point inside the arc, the midpoint is used.
    """
    k = _grid_steps(mesh)
    out = []
    for p, q in _arcs(f):
        mid = 0.5 * (p + q)
        a = round(mid * k) / k
        if not p < a < q:
            a = mid
        b = _lift_image(f, a)
        if not p < b < q or b == a:
            raise InputError(f"{f.label}: arc ({p}, {q}) is not wandering")
        lo, hi = min(a, b), max(a, b)
        pts = {a}
        for i in range(math.floor(lo * k), math.ceil(hi * k) + 1):
            x = i / k
            if (a <= x < b) or (b < x <= a):
                pts.add(x)
        out.extend(sorted(pts))
    if f.space.kind == CIRCLE_KIND:
        out = [x % 1.0 for x in out]
    return out


def transit_cloud(f: MapSystem, mesh: float, horizon: int, back: int | None = None,
                  ahead: int = 16) -> OrbitCloud:
    """Shifted fundamental-domain samples plus the fixed points.

    States are f^-j(a) for anchors a and -ahead <= j <= back (back defaults
    to horizon + 16), then every declared fixed point. Globally periodic maps
    have no wandering points, so they get the plain grid instead. Products
    use the Cartesian product of the factor clouds.
    """
    if horizon < 1:
        raise InputError("horizon must be >= 1")
    if f.factors:
        clouds = [transit_cloud(g, mesh, horizon, back, ahead) for g in f.factors]
        out = clouds[0]
        for c in clouds[1:]:
            out = product_cloud(out, c)
        out.label = f.label
        return out
    if f.period is not None:
        return grid_cloud(f, build_grid(f.space, mesh), horizon)
    if f.space.dimension != 1:
        raise InputError(f"transit clouds need a one-dimensional factor, got {f.space}")
    back = horizon + 16 if back is None else back
    if back < 0 or ahead < 0:
        raise InputError("shift counts must be nonnegative")
    anchors = np.array(fundamental_anchors(f, mesh))[:, None]
    A = len(anchors)
    L = back + ahead + horizon
    table = np.empty((A, L))
    table[:, back] = anchors[:, 0]
    x = anchors
    for s in range(1, back + 1):
        x = f.inv(x)
        table[:, back - s] = x[:, 0]
    x = anchors
    for s in range(1, ahead + horizon):
        x = f.fwd(x)
        table[:, back + s] = x[:, 0]
    fixed = np.array([p[0] for p in f.declared_fixed])
    table = np.vstack([table, np.repeat(fixed[:, None], L, axis=1)])
    if f.space.kind == CIRCLE_KIND:
        table = wrap_coords(table[..., None], (True,))[..., 0]
    shifts = np.arange(-ahead, back + 1)
    rows = np.repeat(np.arange(A), len(shifts))
    offs = np.tile(back - shifts, A)
    refs = np.stack([np.concatenate([rows, A + np.arange(len(fixed))]),
                     np.concatenate([offs, np.zeros(len(fixed), dtype=np.int64)])], axis=-1)
    # canonical order: time-0 coordinate, then shift, then anchor
    start = table[refs[:, 0], refs[:, 1]]
    shift_key = np.concatenate([np.tile(shifts, A), np.zeros(len(fixed), dtype=np.int64)])
    anchor_key = np.concatenate([rows, A + np.arange(len(fixed))])
    order = np.lexsort((anchor_key, shift_key, start))
    refs = refs[order].reshape(-1, 1, 1, 2)
    wrap = np.full(len(table), f.space.kind == CIRCLE_KIND)
    return OrbitCloud(KIND_POINT, table, wrap, refs, horizon, f.space, f.label)


def product_cloud(c1: OrbitCloud, c2: OrbitCloud) -> OrbitCloud:
    """Cartesian product of two single-element point clouds (max metric)."""
    if c1.kind != KIND_POINT or c2.kind != KIND_POINT or c1.r != 1 or c2.r != 1:
        raise InputError("product_cloud needs single-element point clouds")
    T = min(c1.horizon, c2.horizon)
    L = max(c1.table.shape[1], c2.table.shape[1])
    t1 = np.pad(c1.table, ((0, 0), (0, L - c1.table.shape[1])), mode="edge")
    t2 = np.pad(c2.table, ((0, 0), (0, L - c2.table.shape[1])), mode="edge")
    table = np.vstack([t1, t2])
    wrap = np.concatenate([c1.wrap, c2.wrap])
    r2 = c2.refs.copy()
    r2[..., 0] += len(c1.table)
    M1, M2 = len(c1), len(c2)
    left = np.repeat(c1.refs[:, 0], M2, axis=0)
    right = np.tile(r2[:, 0], (M1, 1, 1))
    refs = np.concatenate([left, right], axis=1)[:, None]
    space = product_space([*(c1.space.factors or (c1.space,)), *(c2.space.factors or (c2.space,))])
    return OrbitCloud(KIND_POINT, table, wrap, refs, T, space, f"{c1.label} x {c2.label}")


# ---------------------------------------------------------------------------
# Lifts of a base cloud
# ---------------------------------------------------------------------------


def _require_base(base: OrbitCloud) -> None:
    if base.kind != KIND_POINT or base.r != 1:
        raise InputError("lifts need a single-element point cloud as base")


def hyper_count(M: int, n: int, min_size: int = 1) -> int:
    return sum(math.comb(M, k) for k in range(min_size, min(n, M) + 1))


def _subset_ids(M: int, n: int, min_size: int) -> np.ndarray:
    rows = []
    for k in range(min_size, min(n, M) + 1):
        for combo in itertools.combinations(range(M), k):
            rows.append(combo + (combo[-1],) * (n - k))
    return np.array(rows, dtype=np.int64).reshape(len(rows), n)


def hyper_cloud(base: OrbitCloud, n: int, cap: int | None = None) -> OrbitCloud:
    """All subsets of the base states with at most n elements (F_n lift)."""
    _require_base(base)
    if n < 1:
        raise InputError("hyper_cloud needs n >= 1")
    check_cap(hyper_count(len(base), n), cap)
    ids = _subset_ids(len(base), n, 1)
    refs = base.refs[ids, 0]
    return OrbitCloud(KIND_SET, base.table, base.wrap, refs, base.horizon, base.space,
                      f"F_{n}({base.label})")


def susp_cloud(base: OrbitCloud, n: int, m: int = 1, cap: int | None = None) -> OrbitCloud:
    """The collapsed class followed by all subsets with m < size <= n (SF_n^m lift)."""
    _require_base(base)
    if not n > m >= 1:
        raise InputError(f"susp_cloud needs n > m >= 1, got n={n}, m={m}")
    check_cap(1 + hyper_count(len(base), n, m + 1), cap, what="suspension grid")
    ids = _subset_ids(len(base), n, m + 1)
    ids = np.vstack([np.zeros((1, n), dtype=np.int64), ids])
    refs = base.refs[ids, 0]
    collapsed = np.zeros(len(ids), dtype=np.bool_)
    collapsed[0] = True
    label = f"SF_{n}^{m}({base.label})"
    tmp = OrbitCloud(KIND_SET, base.table, base.wrap, refs, base.horizon, base.space, label)
    radius = _radius(tmp, m)
    radius[0] = 0.0
    return OrbitCloud(KIND_SUSP, base.table, base.wrap, refs, base.horizon, base.space, label, m,
                      radius, collapsed)


def tuple_cloud(base: OrbitCloud, n: int, distinct: bool = True, cap: int | None = None) -> OrbitCloud:
    """Ordered n-tuples of base states on X^n; ``distinct`` samples pi^-1(G_n)."""
    _require_base(base)
    M = len(base)
    if n < 1:
        raise InputError("tuple_cloud needs n >= 1")
    if distinct and n > M:
        raise InputError(f"cannot pick {n} distinct states from a cloud of {M}")
    size = math.perm(M, n) if distinct else M ** n
    check_cap(size, cap, what="tuple grid")
    it = itertools.permutations(range(M), n) if distinct else itertools.product(range(M), repeat=n)
    ids = np.array(list(it), dtype=np.int64).reshape(size, n)
    refs = base.refs[ids, 0]
    return OrbitCloud(KIND_POINT, base.table, base.wrap, refs, base.horizon, base.space,
                      f"{base.label}^x{n}")
