"""Catalog of homeomorphisms with finite non-wandering sets, plus orbit tools.

A :class:`MapSystem` wraps a vectorized forward rule and its explicit inverse.
Both act on arrays of shape ``(..., dim)``; the single-point methods
``forward``/``inverse`` are thin wrappers used by the set-valued constructions.
Fixed points are declared by the catalog and checked at construction time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import InputError
from .spaces import (
    CIRCLE,
    INTERVAL,
    Point,
    SpaceDescriptor,
    base_distance,
    coord_distance,
    make_point,
    product_space,
    random_points,
    wrap_coords,
)

ArrayRule = Callable[[np.ndarray], np.ndarray]

ROUND_TRIP_TOL = 1e-12
FIXED_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MapSystem:
    space: SpaceDescriptor
    fwd: ArrayRule
    inv: ArrayRule
    declared_fixed: tuple[Point, ...]
    label: str
    # every point has this period (identity, rational rotations); None when NW(f) is finite
    period: int | None = None
    factors: tuple["MapSystem", ...] = field(default=())

    def forward(self, p: Sequence[float]) -> Point:
        x = np.asarray(p, dtype=float).reshape(1, self.space.dimension)
        return tuple(float(v) for v in self.fwd(x)[0])

    def inverse(self, p: Sequence[float]) -> Point:
        x = np.asarray(p, dtype=float).reshape(1, self.space.dimension)
        return tuple(float(v) for v in self.inv(x)[0])

    @property
    def nw_finite(self) -> bool:
        if self.factors:
            return all(f.nw_finite for f in self.factors)
        return self.period is None

    def __repr__(self):
        return f"MapSystem({self.label!r} on {self.space})"


def check_map(f: MapSystem, probes: int = 1000, seed: int = 0) -> None:
    """Round-trip and declared-fixed-point checks; raises InputError on failure."""
    rng = np.random.default_rng(seed)
    x = random_points(f.space, probes, rng)
    per = f.space.periodic
    err1 = coord_distance(f.inv(f.fwd(x)), x, per).max()
    err2 = coord_distance(f.fwd(f.inv(x)), x, per).max()
    if max(err1, err2) > ROUND_TRIP_TOL:
        raise InputError(f"{f.label}: forward/inverse round trip error {max(err1, err2):.3g}")
    for p in f.declared_fixed:
        if base_distance(f.space, f.forward(p), p) > FIXED_TOL:
            raise InputError(f"{f.label}: declared fixed point {p} is not fixed")


# ---------------------------------------------------------------------------
# Interval catalog
# ---------------------------------------------------------------------------

def _clip01(x):
    return np.clip(x, 0.0, 1.0)


def _three_fixed_fwd(x):
    lo = 2.0 * x * x
    hi = 0.5 + 2.0 * (x - 0.5) ** 2
    return np.where(x <= 0.5, lo, hi)


def _three_fixed_inv(y):
    lo = np.sqrt(np.maximum(y, 0.0) / 2.0)
    hi = 0.5 + np.sqrt(np.maximum(y - 0.5, 0.0) / 2.0)
    return np.where(y <= 0.5, lo, hi)


def _interval_catalog(name: str, params: Sequence[float]):
    if name == "square":
        return (lambda x: x * x), (lambda x: np.sqrt(_clip01(x))), [0.0, 1.0], None
    if name == "sqrt":
        return (lambda x: np.sqrt(_clip01(x))), (lambda x: x * x), [0.0, 1.0], None
    if name == "power":
        if len(params) != 1 or not params[0] > 0 or params[0] == 1:
            raise InputError("power needs one exponent p > 0, p != 1")
        p = float(params[0])
        return (lambda x: _clip01(x) ** p), (lambda x: _clip01(x) ** (1.0 / p)), [0.0, 1.0], None
    if name == "three-fixed":
        return _three_fixed_fwd, _three_fixed_inv, [0.0, 0.5, 1.0], None
    if name == "identity":
        return (lambda x: x.copy()), (lambda x: x.copy()), [], 1
    raise InputError(f"unknown interval map family {name!r}")


def make_interval_map(name: str, params: Sequence[float] = ()) -> MapSystem:
    """Interval homeomorphisms: square, sqrt, power(p), three-fixed, identity."""
    fwd, inv, fixed, period = _interval_catalog(name, tuple(params))
    label = name if not params else f"{name}:{','.join(f'{p:g}' for p in params)}"
    f = MapSystem(INTERVAL, fwd, inv, tuple((x,) for x in fixed), label, period)
    check_map(f)
    return f


# ---------------------------------------------------------------------------
# Circle catalog
# ---------------------------------------------------------------------------

def _projective(lam: float) -> ArrayRule:
    # action of diag(sqrt(lam), 1/sqrt(lam)) on RP^1 = R/Z: tan(pi y) = lam tan(pi x)
    def rule(x):
        th = np.pi * np.mod(x, 1.0)
        y = np.arctan2(lam * np.sin(th), np.cos(th)) / np.pi
        return wrap_coords(y, (True,))
    return rule


def _rotation(alpha: float) -> ArrayRule:
    return lambda x: wrap_coords(x + alpha, (True,))


def _parse_fraction(params: Sequence[float]) -> Fraction:
    if len(params) == 2:
        p, q = params
        if q == 0 or int(p) != p or int(q) != q:
            raise InputError("rotation needs integers p, q with q != 0")
        return Fraction(int(p), int(q))
    if len(params) == 1:
        fr = Fraction(params[0]).limit_denominator(10_000)
        if abs(float(fr) - params[0]) > 1e-12:
            raise InputError("rotation angle must be rational (pass p, q)")
        return fr
    raise InputError("rotation needs an angle p/q")


def make_circle_map(name: str, params: Sequence[float] = ()) -> MapSystem:
    """Circle homeomorphisms: north-south(delta), rotation(p/q), identity.

    The north-south map is the projective circle map with tan(pi f(x)) =
    (1 - delta) tan(pi x): fixed points 0 (attracting, multiplier 1 - delta)
    and 1/2 (repelling), with the exact inverse obtained from 1 / (1 - delta).
    """
    params = tuple(params)
    if name == "north-south":
        delta = params[0] if params else 0.5
        if not 0.0 < delta < 1.0:
            raise InputError("north-south needs 0 < delta < 1")
        lam = 1.0 - delta
        f = MapSystem(CIRCLE, _projective(lam), _projective(1.0 / lam), ((0.0,), (0.5,)),
                      f"north-south:{delta:g}")
        _verify_fixed_set(f, expected=[0.0, 0.5])
    elif name == "rotation":
        fr = _parse_fraction(params) % 1
        q = fr.denominator
        alpha = fr.numerator / q
        fixed = tuple((i / q,) for i in range(q)) if fr == 0 else ()
        f = MapSystem(CIRCLE, _rotation(alpha), _rotation(-alpha), fixed,
                      f"rotation:{fr.numerator}/{q}", period=q)
    elif name == "identity":
        f = MapSystem(CIRCLE, lambda x: x.copy(), lambda x: x.copy(), (), "circle-identity", period=1)
    else:
        raise InputError(f"unknown circle map family {name!r}")
    check_map(f)
    return f


def _verify_fixed_set(f: MapSystem, expected: Sequence[float], samples: int = 20001) -> None:
    # sign changes of the displacement locate every fixed point of a circle map
    x = np.linspace(0.0, 1.0, samples, endpoint=False)[:, None]
    disp = f.fwd(x)[:, 0] - x[:, 0]
    disp = (disp + 0.5) % 1.0 - 0.5
    found = []
    for i in range(samples):
        a, b = disp[i], disp[(i + 1) % samples]
        if a == 0.0 or a * b < 0:
            found.append(float(x[i, 0]))
    close = all(any(abs(e - c) <= 1.0 / samples for c in found) for e in expected)
    if not close or len(found) != len(expected):
        raise InputError(f"{f.label}: fixed set {found} does not match declared {list(expected)}")


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def make_power(f: MapSystem, k: int) -> MapSystem:
    """k-fold composition f^k (inverse is the k-fold inverse)."""
    if int(k) != k or k < 1:
        raise InputError(f"power needs an integer k >= 1, got {k}")
    k = int(k)
    if k == 1:
        return f

    def fwd(x, _f=f.fwd):
        for _ in range(k):
            x = _f(x)
        return x

    def inv(x, _g=f.inv):
        for _ in range(k):
            x = _g(x)
        return x

    period = None if f.period is None else f.period // math.gcd(f.period, k)
    factors = tuple(make_power(g, k) for g in f.factors)
    return MapSystem(f.space, fwd, inv, f.declared_fixed, f"{f.label}^{k}", period, factors)


def _split(dims: Sequence[int]):
    cuts = np.cumsum([0, *dims])
    return [slice(int(a), int(b)) for a, b in zip(cuts[:-1], cuts[1:])]


def make_product(f: MapSystem, g: MapSystem) -> MapSystem:
    """Coordinatewise map f x g on the max-metric product space."""
    parts = tuple(f.factors or (f,)) + tuple(g.factors or (g,))
    space = product_space([p.space for p in parts])
    slices = _split([p.space.dimension for p in parts])

    def fwd(x):
        return np.concatenate([p.fwd(x[..., s]) for p, s in zip(parts, slices)], axis=-1)

    def inv(x):
        return np.concatenate([p.inv(x[..., s]) for p, s in zip(parts, slices)], axis=-1)

    fixed = [()]
    for p in parts:
        fixed = [a + b for a in fixed for b in p.declared_fixed]
    periods = [p.period for p in parts]
    period = math.lcm(*periods) if all(q is not None for q in periods) else None
    label = " x ".join(p.label for p in parts)
    return MapSystem(space, fwd, inv, tuple(fixed), label, period, parts)


def make_conjugate(h: tuple[ArrayRule, ArrayRule], f: MapSystem, label: str = "h") -> MapSystem:
    """Conjugate h o f o h^-1 for a homeomorphism h given as (h, h^-1)."""
    h_fwd, h_inv = h
    probe = MapSystem(f.space, h_fwd, h_inv, (), label)
    try:
        check_map(probe)
    except InputError as exc:
        raise InputError(f"conjugating map is not a homeomorphism: {exc}") from None

    def fwd(x):
        return h_fwd(f.fwd(h_inv(x)))

    def inv(x):
        return h_fwd(f.inv(h_inv(x)))

    fixed = tuple(make_point(f.space, probe.forward(p)) for p in f.declared_fixed)
    g = MapSystem(f.space, fwd, inv, fixed, f"{label}.{f.label}", f.period)
    check_map(g)
    return g


# ---------------------------------------------------------------------------
# Orbits and limit sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitTable:
    start: Point
    horizon: int
    states: tuple[Point, ...]


def iterate_orbit(f: MapSystem, x0: Sequence[float], N: int) -> OrbitTable:
    """The orbit segment (x0, f(x0), ..., f^{N-1}(x0))."""
    if N < 1:
        raise InputError("orbit horizon must be >= 1")
    x = np.asarray(x0, dtype=float).reshape(1, f.space.dimension)
    states = []
    for _ in range(N):
        states.append(tuple(float(v) for v in x[0]))
        x = f.fwd(x)
    return OrbitTable(states[0], N, tuple(states))


def orbit_array(rule: ArrayRule, x0: np.ndarray, N: int) -> np.ndarray:
    """Vectorized orbits: (M, dim) starts -> (M, N, dim) array."""
    x = np.asarray(x0, dtype=float)
    out = np.empty((x.shape[0], N, x.shape[1]))
    for t in range(N):
        out[:, t] = x
        if t + 1 < N:
            x = rule(x)
    return out


@dataclass(frozen=True)
class LimitSetReport:
    point: Point
    omega: tuple[Point, ...]
    alpha: tuple[Point, ...]
    converged: bool


def _cluster(space: SpaceDescriptor, pts: np.ndarray, tol: float) -> tuple[list[Point], bool]:
    centers: list[np.ndarray] = []
    members: list[list[np.ndarray]] = []
    per = space.periodic
    for p in pts:
        for c, mem in zip(centers, members):
            if coord_distance(p, c, per) < tol:
                mem.append(p)
                break
        else:
            centers.append(p)
            members.append([p])
    converged = True
    for mem in members:
        m = np.array(mem)
        diam = coord_distance(m[:, None, :], m[None, :, :], per).max()
        converged &= bool(diam < tol)
    return sorted(tuple(float(v) for v in c) for c in centers), converged


def limit_sets(f: MapSystem, x0: Sequence[float], burn: int | None = None, horizon: int = 2000,
               cluster_tol: float = 1e-6) -> LimitSetReport:
    """Approximate omega- and alpha-limit sets by clustering orbit tails.

    The alpha-limit set uses the explicit inverse rule. ``burn`` defaults to
    half the horizon.
    """
    if burn is None:
        burn = horizon // 2
    if not horizon > burn >= 0:
        raise InputError("limit_sets needs horizon > burn >= 0")
    x = np.asarray(x0, dtype=float).reshape(1, f.space.dimension)
    fwd_tail = orbit_array(f.fwd, x, horizon)[0, burn:]
    bwd_tail = orbit_array(f.inv, x, horizon)[0, burn:]
    omega, ok1 = _cluster(f.space, fwd_tail, cluster_tol)
    alpha, ok2 = _cluster(f.space, bwd_tail, cluster_tol)
    return LimitSetReport(tuple(float(v) for v in x[0]), tuple(omega), tuple(alpha), ok1 and ok2)


# ---------------------------------------------------------------------------
# System strings used by configs and the CLI
# ---------------------------------------------------------------------------

INTERVAL_FAMILIES = ("square", "sqrt", "power", "three-fixed", "identity")
CIRCLE_FAMILIES = ("north-south", "rotation", "circle-identity")


def _parse_params(text: str) -> list[float]:
    out: list[float] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "/" in tok:
            p, q = tok.split("/", 1)
            out.extend([float(p), float(q)])
        else:
            out.append(float(tok))
    return out


def parse_system(text: str) -> MapSystem:
    """Build a map from text such as ``square``, ``north-south:0.5``,
    ``rotation:1/3``, ``square^2`` or ``square*north-south:0.5``."""
    text = text.strip()
    if not text:
        raise InputError("empty system string")
    if "*" in text:
        parts = [parse_system(s) for s in text.split("*")]
        f = parts[0]
        for g in parts[1:]:
            f = make_product(f, g)
        return f
    power = 1
    if "^" in text:
        text, k = text.rsplit("^", 1)
        try:
            power = int(k)
        except ValueError:
            raise InputError(f"bad power {k!r}") from None
    name, _, rest = text.partition(":")
    try:
        params = _parse_params(rest)
    except ValueError:
        raise InputError(f"bad parameters in system string {text!r}") from None
    if name in INTERVAL_FAMILIES:
        f = make_interval_map(name, params)
    elif name == "circle-identity":
        f = make_circle_map("identity", params)
    elif name in CIRCLE_FAMILIES:
        f = make_circle_map(name, params)
    else:
        raise InputError(f"unknown map family {name!r}; known: {INTERVAL_FAMILIES + CIRCLE_FAMILIES}")
    return make_power(f, power)
