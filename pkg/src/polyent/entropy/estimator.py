"""Separated and covering counts, and log-log slope estimates of h_pol.

Two implementations share the same greedy rule (scan states in order, keep a
state iff it is at d_n-distance >= eps from everything kept so far):

* :func:`greedy_separated` / :func:`greedy_cover` work on arbitrary hashable
  states through a :class:`DynMetricContext`. They are the reference path.
* :func:`cloud_counts` runs the numba kernel on an :class:`OrbitCloud`.

A greedy maximal separated set is also a cover by open eps-balls, so the
covering count C is the smaller of the greedy sets found scanning in
canonical and in reverse order. The reported S(n, eps) is the largest greedy
set found at any n' <= n and eps' >= eps on the same cloud; all of those are
(n, eps)-separated, so S stays a valid lower bound for the maximum while
becoming monotone, and the sandwich S(n, 2 eps) <= C(n, eps) <= S(n, eps)
holds by construction.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from ..errors import InputError
from ..hyperspace import apply_product, hausdorff_distance, induced_map_F, tuple_distance
from ..maps import MapSystem
from ..spaces import base_distance
from ..suspension import induced_map_S, susp_distance
from ._kernels import dyn_dist, greedy_kernel, pair_matrix
from .clouds import OrbitCloud

# ---------------------------------------------------------------------------
# Reference path: explicit states
# ---------------------------------------------------------------------------


class DynMetricContext:
    """A state space with its dynamics: one step map, one distance, cached orbits."""

    def __init__(self, step: Callable[[Any], Any], distance: Callable[[Any, Any], float],
                 label: str = "", time_depth: int | None = None):
        self.step = step
        self.distance = distance
        self.label = label
        self.time_depth = time_depth
        self._orbits: dict[Hashable, list] = {}

    @classmethod
    def of_map(cls, f: MapSystem, time_depth: int | None = None) -> "DynMetricContext":
        return cls(f.forward, partial(base_distance, f.space), f.label, time_depth)

    @classmethod
    def of_hyperspace(cls, f: MapSystem, time_depth: int | None = None) -> "DynMetricContext":
        return cls(partial(induced_map_F, f), partial(hausdorff_distance, f.space),
                   f"F({f.label})", time_depth)

    @classmethod
    def of_suspension(cls, f: MapSystem, time_depth: int | None = None) -> "DynMetricContext":
        return cls(partial(induced_map_S, f), susp_distance, f"SF({f.label})", time_depth)

    @classmethod
    def of_tuples(cls, f: MapSystem, time_depth: int | None = None) -> "DynMetricContext":
        return cls(partial(apply_product, f), partial(tuple_distance, f.space),
                   f"{f.label}^xn", time_depth)

    def orbit(self, x: Hashable, n: int) -> list:
        """The first n states of the orbit of x (cached, extended on demand)."""
        orb = self._orbits.get(x)
        if orb is None:
            orb = self._orbits[x] = [x]
        while len(orb) < n:
            orb.append(self.step(orb[-1]))
        return orb[:n]

    def depth(self, n: int | None) -> int:
        n = self.time_depth if n is None else n
        if n is None or n < 1:
            raise InputError(f"time depth must be >= 1, got {n}")
        return n


def dyn_distance(ctx: DynMetricContext, x, y, n: int | None = None) -> float:
    """d_n(x, y) = max over k < n of d(f^k x, f^k y)."""
    n = ctx.depth(n)
    return max(ctx.distance(a, b) for a, b in zip(ctx.orbit(x, n), ctx.orbit(y, n)))


def greedy_separated_set(points: Sequence, ctx: DynMetricContext, n: int | None, eps: float) -> list:
    """Greedy maximal (n, eps)-separated subset, scanning ``points`` in order."""
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    n = ctx.depth(n)
    kept: list = []
    for x in points:
        if all(dyn_distance(ctx, x, y, n) >= eps for y in kept):
            kept.append(x)
    return kept


def greedy_separated(points: Sequence, ctx: DynMetricContext, n: int | None, eps: float) -> int:
    return len(greedy_separated_set(points, ctx, n, eps))


def greedy_cover(points: Sequence, ctx: DynMetricContext, n: int | None, eps: float) -> int:
    """Size of a cover of ``points`` by open d_n-balls of radius eps.

    Greedy maximal separated sets are covers; the smaller of the canonical
    and the reverse scan is returned.
    """
    points = list(points)
    return min(greedy_separated(points, ctx, n, eps), greedy_separated(points[::-1], ctx, n, eps))


# ---------------------------------------------------------------------------
# Fast path: orbit clouds
# ---------------------------------------------------------------------------


def _check_depth(cloud: OrbitCloud, n: int) -> None:
    if not 1 <= n <= cloud.horizon:
        raise InputError(f"time depth {n} outside [1, {cloud.horizon}] for this cloud")


def cloud_greedy(cloud: OrbitCloud, n: int, eps: float, reverse: bool = False) -> np.ndarray:
    """Indices of the greedy (n, eps)-separated subset of the cloud."""
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    _check_depth(cloud, n)
    M = len(cloud)
    if M == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.arange(M, dtype=np.int64)
    if reverse:
        order = order[::-1].copy()
    sk_table, sk_wrap, sk_refs = cloud.sketches()
    return greedy_kernel(*cloud.kernel_args(), sk_table, sk_wrap, sk_refs, cloud.peaks(), order,
                         int(n), float(eps))


def cloud_dyn_distance(cloud: OrbitCloud, i: int, j: int, n: int) -> float:
    _check_depth(cloud, n)
    return float(dyn_dist(*cloud.kernel_args(), int(i), int(j), int(n)))


def cloud_distance_matrix(cloud: OrbitCloud, n: int) -> np.ndarray:
    """All pairwise d_n distances; quadratic, for small clouds only."""
    _check_depth(cloud, n)
    return pair_matrix(*cloud.kernel_args(), int(n))


@dataclass(frozen=True)
class CountRecord:
    epsilon: float
    time_depth: int
    separated: int       # monotone envelope of greedy separated sets
    covering: int        # smaller of the two greedy covers
    raw_separated: int   # greedy separated set in canonical order


def cloud_counts(cloud: OrbitCloud, eps_list: Sequence[float], n_list: Sequence[int],
                 jobs: int = 1) -> list[CountRecord]:
    """Count records for every (eps, n) pair, ordered by eps then n.

    Tasks are independent and may run on ``jobs`` threads; results do not
    depend on the schedule.
    """
    eps_list = [float(e) for e in eps_list]
    n_list = [int(n) for n in n_list]
    for n in n_list:
        _check_depth(cloud, n)
    cloud.peaks()  # build sketches once, before threads share the cloud
    tasks = [(e, n, rev) for e in eps_list for n in n_list for rev in (False, True)]

    def run(task):
        e, n, rev = task
        return len(cloud_greedy(cloud, n, e, rev))

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            sizes = list(pool.map(run, tasks))
    else:
        sizes = [run(t) for t in tasks]
    fwd = {(e, n): s for (e, n, rev), s in zip(tasks, sizes) if not rev}
    bwd = {(e, n): s for (e, n, rev), s in zip(tasks, sizes) if rev}
    records = []
    for e in eps_list:
        for n in n_list:
            env = max(fwd[(e2, n2)] for e2 in eps_list for n2 in n_list if e2 >= e and n2 <= n)
            records.append(CountRecord(e, n, env, min(fwd[(e, n)], bwd[(e, n)]), fwd[(e, n)]))
    return records


# ---------------------------------------------------------------------------
# Slopes
# ---------------------------------------------------------------------------


def slope_fit(census: Sequence[tuple[int, int]], window: float = 0.5) -> tuple[float, float]:
    """Least-squares slope of log count against log n over the top ``window``
    fraction of the (logarithmic) n-range.

    At least three points enter the fit. Returns (slope, rms residual).
    """
    pts = sorted((int(n), float(c)) for n, c in census)
    if len(pts) < 3:
        raise InputError(f"slope_fit needs at least 3 census points, got {len(pts)}")
    if any(n < 1 or c < 1 for n, c in pts):
        raise InputError("slope_fit needs n >= 1 and counts >= 1")
    if len({n for n, _ in pts}) != len(pts):
        raise InputError("slope_fit got repeated depths")
    if not 0 < window <= 1:
        raise InputError(f"window must be in (0, 1], got {window}")
    x = np.log([n for n, _ in pts])
    y = np.log([c for _, c in pts])
    cut = x[-1] - window * (x[-1] - x[0])
    sel = x >= cut - 1e-12
    if sel.sum() < 3:
        sel = np.zeros(len(x), dtype=bool)
        sel[-3:] = True
    x, y = x[sel], y[sel]
    if np.all(y == y[0]):
        return 0.0, 0.0
    xc = x - x.mean()
    slope = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    fit = y.mean() + slope * xc
    return slope, float(np.sqrt(np.mean((y - fit) ** 2)))


def fit_window(n_list: Sequence[int], window: float) -> tuple[int, ...]:
    """The depths slope_fit uses for this n_list and window."""
    n_sorted = sorted(n_list)
    x = np.log(n_sorted)
    cut = x[-1] - window * (x[-1] - x[0])
    sel = [n for n, v in zip(n_sorted, x) if v >= cut - 1e-12]
    return tuple(sel if len(sel) >= 3 else n_sorted[-3:])


@dataclass(frozen=True)
class SlopeRow:
    epsilon: float
    slope: float
    residual: float
    n_window: tuple[int, ...]


@dataclass(frozen=True)
class SlopeTable:
    rows: tuple[SlopeRow, ...]
    records: tuple[CountRecord, ...] = field(default=())

    @property
    def headline(self) -> float:
        """Slope at the smallest eps."""
        return min(self.rows, key=lambda r: r.epsilon).slope

    def slope_at(self, eps: float) -> float:
        for r in self.rows:
            if math.isclose(r.epsilon, eps, rel_tol=1e-12):
                return r.slope
        raise KeyError(eps)


def _validate_lists(eps_list: Sequence[float], n_list: Sequence[int]) -> None:
    if not eps_list or not n_list:
        raise InputError("eps_list and n_list must be nonempty")
    if any(not e > 0 for e in eps_list):
        raise InputError("every eps must be positive")
    if any(a <= b for a, b in zip(eps_list, eps_list[1:])):
        raise InputError(f"eps_list must be strictly decreasing, got {list(eps_list)}")
    if any(a >= b for a, b in zip(n_list, n_list[1:])):
        raise InputError(f"n_list must be strictly increasing, got {list(n_list)}")
    if len(n_list) < 3:
        raise InputError("n_list needs at least 3 depths for a slope")


def slope_table(records: Sequence[CountRecord], window: float = 0.5) -> SlopeTable:
    by_eps: dict[float, list[CountRecord]] = {}
    for r in records:
        by_eps.setdefault(r.epsilon, []).append(r)
    rows = []
    for e, recs in by_eps.items():
        census = [(r.time_depth, r.separated) for r in recs]
        s, res = slope_fit(census, window)
        rows.append(SlopeRow(e, s, res, fit_window([n for n, _ in census], window)))
    return SlopeTable(tuple(rows), tuple(records))


def estimate_hpol(cloud: OrbitCloud, eps_list: Sequence[float], n_list: Sequence[int],
                  window: float = 0.5, jobs: int = 1) -> SlopeTable:
    """Per-eps slopes of log S(n, eps) against log n, headline at the smallest eps."""
    _validate_lists(eps_list, n_list)
    return slope_table(cloud_counts(cloud, eps_list, n_list, jobs), window)
