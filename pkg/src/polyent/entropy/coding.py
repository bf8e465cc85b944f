"""Orbit codings relative to a family of letters, and word censuses.

A family is a list of closed letters Y_1..Y_L avoiding the non-wandering set,
plus the implicit complement letter Y_inf. A point lying in several letters
may be coded by any of them, so overlapping letters make codings branch; the
census counts every branch.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import InputError, ResourceError
from ..maps import MapSystem, orbit_array
from ._kernels import KIND_POINT
from .clouds import OrbitCloud, cloud_from_points
from .estimator import slope_fit

Y_INF = "Y_inf"
BRANCH_CAP = 1 << 16  # codings per orbit before the census gives up


@dataclass(frozen=True)
class Letter:
    label: str
    contains: Callable[[np.ndarray], np.ndarray]  # (..., dim) coordinates -> bool mask


def box_letter(label: str, bounds: Sequence[tuple[float, float]]) -> Letter:
    """The closed box prod [lo_i, hi_i]."""
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    if np.any(lo > hi):
        raise InputError(f"letter {label!r} has an empty box {list(bounds)}")
    if label == Y_INF:
        raise InputError(f"{Y_INF!r} is reserved for the complement letter")

    def contains(x):
        x = np.asarray(x, dtype=float)
        return np.all((x >= lo) & (x <= hi), axis=-1)

    return Letter(label, contains)


@dataclass(frozen=True)
class CodingFamily:
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        labels = [l.label for l in self.letters]
        if len(set(labels)) != len(labels):
            raise InputError(f"letter labels must be distinct, got {labels}")
        if len(labels) > 62:
            raise InputError("at most 62 letters are supported")

    @property
    def alphabet_size(self) -> int:
        return len(self.letters) + 1

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l.label for l in self.letters) + (Y_INF,)

    def masks(self, x: np.ndarray) -> np.ndarray:
        """Bit j is set where the point lies in letter j."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1], dtype=np.int64)
        for j, letter in enumerate(self.letters):
            out |= letter.contains(x).astype(np.int64) << j
        return out

    def check_avoids(self, f: MapSystem) -> None:
        """Every explicit letter must miss the non-wandering set of f."""
        if not self.letters:
            return
        if f.period is not None or not f.nw_finite:
            raise InputError(f"{f.label}: every point is non-wandering, no letter can avoid NW(f)")
        if f.declared_fixed:
            pts = np.array(f.declared_fixed, dtype=float)
            hit = self.masks(pts)
            if hit.any():
                bad = [f.declared_fixed[i] for i in np.flatnonzero(hit)]
                raise InputError(f"letters contain non-wandering points {bad}")


def _expand(mask_row: np.ndarray, L: int) -> list[tuple[int, ...]]:
    choices = []
    total = 1
    for m in mask_row:
        opts = [j for j in range(L) if m >> j & 1] or [L]
        total *= len(opts)
        if total > BRANCH_CAP:
            raise ResourceError(f"one orbit has more than {BRANCH_CAP} codings", required=total)
        choices.append(opts)
    return list(itertools.product(*choices))


def code_orbit(f: MapSystem, x0: Sequence[float], N: int, family: CodingFamily) -> list[tuple[str, ...]]:
    """All codings of (x0, f(x0), ..., f^{N-1}(x0)); a single word when letters are disjoint."""
    if N < 1:
        raise InputError("code_orbit needs N >= 1")
    family.check_avoids(f)
    x = np.asarray(x0, dtype=float).reshape(1, f.space.dimension)
    masks = family.masks(orbit_array(f.fwd, x, N)[0])
    labels = family.labels
    return [tuple(labels[j] for j in w) for w in _expand(masks, len(family.letters))]


@dataclass(frozen=True)
class WordCensus:
    counts: tuple[tuple[int, int], ...]  # (time depth, distinct words)
    alphabet_size: int
    slope: float
    residual: float


def _code_rows(masks: np.ndarray, L: int) -> np.ndarray:
    """Letter indices per time; orbits with branching codings become several rows."""
    single = (masks & (masks - 1)) == 0
    codes = np.full(masks.shape, L, dtype=np.int64)
    for j in range(L):
        codes[masks == 1 << j] = j
    plain = single.all(axis=1)
    extra = [w for row in masks[~plain] for w in _expand(row, L)]
    if extra:
        codes = np.vstack([codes[plain], np.array(extra, dtype=np.int64)])
    return codes


def _prefix_counts(codes: np.ndarray, depths: Sequence[int], base: int) -> list[int]:
    """Number of distinct prefixes of each depth, by refining prefix classes one step at a time."""
    out = []
    want = set(depths)
    group = np.zeros(len(codes), dtype=np.int64)
    for t in range(max(depths)):
        _, group = np.unique(group * base + codes[:, t], return_inverse=True)
        group = group.reshape(-1)
        if t + 1 in want:
            out.append(int(group.max()) + 1 if len(group) else 0)
    return out


def word_census(f: MapSystem, starts: OrbitCloud | Sequence[Sequence[float]], N_list: Sequence[int],
                family: CodingFamily, window: float = 0.5) -> WordCensus:
    """Distinct codings of length N over all start orbits, with the log-log slope.

    The slope is a lower-bound proxy for h_pol: it only sees the wandering
    behaviour the letters can resolve.
    """
    family.check_avoids(f)
    N_list = sorted(int(N) for N in N_list)
    if not N_list or N_list[0] < 1:
        raise InputError("N_list must contain depths >= 1")
    Nmax = N_list[-1]
    if isinstance(starts, OrbitCloud):
        if starts.kind != KIND_POINT or starts.r != 1:
            raise InputError("word_census needs a single-element point cloud")
        if Nmax > starts.horizon:
            raise InputError(f"depth {Nmax} exceeds the cloud horizon {starts.horizon}")
        cloud = starts
    else:
        cloud = cloud_from_points(f, starts, Nmax)
    L = len(family.letters)
    masks = np.empty((len(cloud), Nmax), dtype=np.int64)
    chunk = max(1, 1_000_000 // Nmax)
    for s in range(0, len(cloud), chunk):
        part = cloud.subset(np.arange(s, min(len(cloud), s + chunk)))
        masks[s:s + chunk] = family.masks(part.coords(np.arange(Nmax))[:, :, 0, :])
    codes = _code_rows(masks, L)
    counts = tuple(zip(N_list, _prefix_counts(codes, N_list, L + 1)))
    if len(counts) >= 3:
        slope, res = slope_fit(counts, window)
    else:
        slope, res = float("nan"), float("nan")
    return WordCensus(counts, family.alphabet_size, slope, res)
