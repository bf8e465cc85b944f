"""The acceptance suites: exact structural checks and desk-scale slope checks.

Every check returns a :class:`CheckResult` carrying its criterion number, a
pass flag and the measured values, so the CLI and the test suite print the
same lines.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .entropy import (
    DynMetricContext,
    cloud_distance_matrix,
    cloud_from_finsets,
    cloud_from_points,
    cloud_from_susp,
    cloud_greedy,
    greedy_separated_set,
    word_census,
    box_letter,
    CodingFamily,
    transit_cloud,
)
from .entropy.estimator import CountRecord
from .errors import InputError
from .experiment import ExperimentConfig, ExperimentResult, run
from .hyperspace import FinSet, hausdorff_distance, hyper_grid, induced_map_F, project_pi, apply_product
from .maps import MapSystem, make_conjugate, parse_system
from .spaces import CIRCLE, INTERVAL, base_distance, build_grid, product_space
from .suspension import (
    SuspPoint,
    collapsed_point,
    dist_to_Fm,
    fixed_points_of_induced_S,
    induced_map_S,
    iterate_identity_check,
    quotient_q,
    susp_distance,
    susp_grid,
)

METRIC_SLACK = 1e-12
PROBES = 10_000


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    passed: bool
    measured: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.criterion:>2} {self.name}: {self.measured} ({self.seconds:.1f}s)"


@dataclass
class Session:
    """Shares experiment results between checks and remembers every count record."""
    seed: int = 0
    results: dict = field(default_factory=dict)

    def run(self, f: MapSystem | None = None, key: str = "", **kw) -> ExperimentResult:
        cfg = ExperimentConfig(**kw)
        k = (key, cfg)
        if k not in self.results:
            t = time.perf_counter()
            res = run(cfg, f)
            self.results[k] = (res, time.perf_counter() - t)
        return self.results[k][0]

    def seconds(self, key: str = "", **kw) -> float:
        return self.results[(key, ExperimentConfig(**kw))][1]

    def record_groups(self) -> list[list[CountRecord]]:
        """The count records of each experiment run so far."""
        return [list(res.raw.records) for res, _ in self.results.values() if res.config.mode != "coding"]

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


Check = Callable[[Session], CheckResult]


def _timed(criterion: int, name: str):
    def wrap(fn: Callable[[Session], tuple[bool, str]]) -> Check:
        def check(session: Session) -> CheckResult:
            t = time.perf_counter()
            passed, measured = fn(session)
            return CheckResult(criterion, name, bool(passed), measured, time.perf_counter() - t)
        check.__name__ = fn.__name__
        check.criterion = criterion
        check.check_name = name
        return check
    return wrap


def _f(x: float) -> str:
    return f"{x:.4g}"


# ---------------------------------------------------------------------------
# Metric axioms
# ---------------------------------------------------------------------------

MIXED = product_space([INTERVAL, CIRCLE])


def _axiom_failures(d: Callable, triples: Iterable[tuple]) -> tuple[int, int]:
    bad = total = 0
    for x, y, z in triples:
        total += 1
        dxy, dyx, dxz, dyz, dxx = d(x, y), d(y, x), d(x, z), d(y, z), d(x, x)
        ok = (dxx == 0.0 and dxy == dyx and dxy >= 0
              and dxz <= dxy + dyz + METRIC_SLACK
              and (dxy > 0) == (x != y))
        bad += not ok
    return bad, total


def _random_point(space, rng):
    return tuple(float(v) for v in rng.random(space.dimension))


def _random_finset(space, rng, n, snap=None):
    k = int(rng.integers(1, n + 1))
    pts = rng.random((k, space.dimension))
    if snap:
        pts = np.round(pts * snap) / snap  # repeated points exercise deduplication
    return FinSet.of(pts % 1.0 if space.periodic[0] else pts, n)


@_timed(9, "base metric axioms on interval, circle and interval x circle")
def check_base_metric(session: Session):
    rng = session.rng(1)
    bad = total = 0
    for space in (INTERVAL, CIRCLE, MIXED):
        triples = [tuple(_random_point(space, rng) for _ in range(3)) for _ in range(PROBES)]
        b, t = _axiom_failures(lambda p, q: base_distance(space, p, q), triples)
        bad, total = bad + b, total + t
    return bad == 0, f"{bad} violations in {total} triples"


@_timed(9, "Hausdorff metric axioms on F_3")
def check_hausdorff_metric(session: Session):
    rng = session.rng(2)
    bad = total = 0
    for space in (INTERVAL, CIRCLE):
        triples = [tuple(_random_finset(space, rng, 3, snap=8) for _ in range(3)) for _ in range(PROBES)]
        b, t = _axiom_failures(lambda A, B: hausdorff_distance(space, A, B), triples)
        bad, total = bad + b, total + t
    return bad == 0, f"{bad} violations in {total} triples"


def _random_susp(space, rng, n, m):
    if rng.random() < 0.1:
        return collapsed_point(space, n, m)
    return quotient_q(_random_finset(space, rng, n, snap=8), m, space, n)


@_timed(9, "collapse metric axioms on SF_3^1 and SF_3^2")
def check_collapse_metric(session: Session):
    rng = session.rng(3)
    bad = total = 0
    for space, m in ((INTERVAL, 1), (CIRCLE, 2)):
        triples = [tuple(_random_susp(space, rng, 3, m) for _ in range(3)) for _ in range(PROBES)]
        b, t = _axiom_failures(susp_distance, triples)
        bad, total = bad + b, total + t
    return bad == 0, f"{bad} violations in {total} triples"


def _brute_dist_to_Fm(pts: np.ndarray, periodic: bool, m: int, centers: np.ndarray) -> float:
    """min over center sets C (|C| <= m, from the oracle grid) of d_H(A, C)."""
    best = np.inf
    for k in range(1, m + 1):
        combos = np.array(list(itertools.combinations(range(len(centers)), k)))
        C = centers[combos]                                     # (K, k)
        d = np.abs(pts[None, :, None] - C[:, None, :])          # (K, |A|, k)
        if periodic:
            d = np.minimum(d, 1.0 - d)
        h = np.maximum(d.min(axis=2).max(axis=1), d.min(axis=1).max(axis=1))
        best = min(best, float(h.min()))
    return best


@_timed(9, "dist_to_Fm partition algorithm vs grid-center brute force")
def check_dist_to_Fm(session: Session):
    rng = session.rng(4)
    mesh = 1 / 128
    worst = 0.0
    above = 0
    count = 1000
    for i in range(count):
        space = INTERVAL if i % 2 == 0 else CIRCLE
        periodic = space.periodic[0]
        centers = np.array([p[0] for p in build_grid(space, mesh).points])
        A = FinSet.of(rng.random((int(rng.integers(2, 5)), 1)))
        m = int(rng.integers(1, 3))
        got = dist_to_Fm(space, A, m)
        want = _brute_dist_to_Fm(np.array([p[0] for p in A]), periodic, m, centers)
        worst = max(worst, abs(got - want))
        above += got > want + METRIC_SLACK
    ok = worst <= mesh and above == 0
    return ok, f"max |algorithm - oracle| = {_f(worst)} (mesh {_f(mesh)}), {above} above the oracle in {count} sets"


# ---------------------------------------------------------------------------
# Dynamics identities
# ---------------------------------------------------------------------------

def _systems() -> list[MapSystem]:
    return [parse_system("square"), parse_system("north-south"), parse_system("sqrt*north-south")]


@_timed(9, "semiconjugacy pi o f^xn = F_n(f) o pi")
def check_semiconjugacy(session: Session):
    rng = session.rng(5)
    bad = 0
    systems = _systems()
    for i in range(PROBES):
        f = systems[i % len(systems)]
        n = 2 + i % 3
        t = [tuple(float(v) for v in rng.random(f.space.dimension)) for _ in range(n)]
        if i % 4 == 0:
            t[-1] = t[0]  # coincident coordinates
        bad += project_pi(apply_product(f, t)) != induced_map_F(f, project_pi(t))
    return bad == 0, f"{bad} mismatches in {PROBES} probes"


@_timed(9, "q-diagram q o F_n(f) = SF_n^m(f) o q")
def check_q_diagram(session: Session):
    rng = session.rng(6)
    bad = 0
    systems = _systems()
    for i in range(PROBES):
        f = systems[i % len(systems)]
        n = 2 + i % 3
        m = 1 + int(rng.integers(0, n - 1))
        A = FinSet.of(rng.random((int(rng.integers(1, n + 1)), f.space.dimension)), n)
        lhs = quotient_q(induced_map_F(f, A), m, f.space, n)
        rhs = induced_map_S(f, quotient_q(A, m, f.space, n))
        bad += lhs != rhs
    return bad == 0, f"{bad} mismatches in {PROBES} probes"


@_timed(9, "iterate identity SF_n(f^k) = SF_n(f)^k for k = 2, 3")
def check_iterate_identity(session: Session):
    rng = session.rng(7)
    failures = []
    for f in _systems():
        probes = [_random_susp(f.space, rng, 3, 1) if f.space.dimension == 1 else
                  quotient_q(FinSet.of(rng.random((3, f.space.dimension)), 3), 1, f.space, 3)
                  for _ in range(PROBES // 6)]
        for k in (2, 3):
            if not iterate_identity_check(f, k, probes):
                failures.append(f"{f.label} k={k}")
    return not failures, "exact on all probes" if not failures else "fails for " + ", ".join(failures)


def sandwich_failures(records: Iterable[CountRecord]) -> tuple[int, int]:
    """Records of one experiment breaking S(n, 2 eps) <= C(n, eps) <= S(n, eps);
    the left side is checked whenever 2 eps was measured at the same depth."""
    records = list(records)
    by = {(r.epsilon, r.time_depth): r for r in records}
    bad = 0
    for r in records:
        ok = r.covering <= r.separated
        wide = by.get((2 * r.epsilon, r.time_depth))
        if wide is not None:
            ok = ok and wide.separated <= r.covering
        bad += not ok
    return bad, len(records)


@_timed(9, "sandwich S(n,2eps) <= C(n,eps) <= S(n,eps) on every record")
def check_sandwich(session: Session):
    bad = total = 0
    for f in ("square", "north-south", "identity"):
        res = session.run(key="sandwich", system=f, mode="base", mesh=1 / 64, nmax=64,
                          eps=(1 / 4, 1 / 8, 1 / 16, 1 / 32))
        b, t = sandwich_failures(res.raw.records)
        bad, total = bad + b, total + t
    return bad == 0, f"{bad} violations in {total} records"


def _max_separated(close: np.ndarray) -> int:
    """Exact maximum independent set of the 'closer than eps' graph."""
    n = len(close)
    nbr = [sum(1 << j for j in range(n) if close[i, j] and i != j) for i in range(n)]

    def best(cands: int) -> int:
        if not cands:
            return 0
        v = (cands & -cands).bit_length() - 1
        rest = cands & ~(1 << v)
        take = 1 + best(rest & ~nbr[v])
        if not (rest & nbr[v]):
            return take
        return max(take, best(rest))

    return best((1 << n) - 1)


def _small_clouds(rng):
    """(cloud, reference states, reference context, monotone flag) for the packing oracle.

    The half-optimum bound needs the linear order that increasing interval maps
    preserve: a kept state then blocks at most one optimal state on each side.
    """
    out = []
    for name, monotone in (("square", True), ("sqrt", True), ("north-south", False),
                           ("square*north-south", False)):
        f = parse_system(name)
        pts = [tuple(float(v) for v in rng.random(f.space.dimension)) for _ in range(int(rng.integers(5, 16)))]
        out.append((cloud_from_points(f, pts, 16), pts, DynMetricContext.of_map(f), monotone))
    f = parse_system("sqrt")  # square orbits underflow to 0 and would merge set elements
    sets = list({_random_finset(INTERVAL, rng, 3) for _ in range(12)})
    out.append((cloud_from_finsets(f, sets, 16), sets, DynMetricContext.of_hyperspace(f), False))
    sp = list({quotient_q(_random_finset(INTERVAL, rng, 3), 1, INTERVAL, 3) for _ in range(12)})
    out.append((cloud_from_susp(f, sp, 16), sp, DynMetricContext.of_suspension(f), False))
    return out


@_timed(9, "greedy vs exhaustive packing on clouds of at most 15 states")
def check_packing_oracle(session: Session):
    rng = session.rng(8)
    problems = []
    trials = 0
    for rep in range(20):
        for cloud, states, ctx, monotone in _small_clouds(rng):
            n = int(rng.integers(1, 17))
            eps = float(rng.choice([0.05, 0.1, 0.2, 0.3]))
            D = cloud_distance_matrix(cloud, n)
            close = D < eps
            kept = cloud_greedy(cloud, n, eps)
            ref = greedy_separated_set(states, ctx, n, eps)
            opt = _max_separated(close)
            trials += 1
            sub = close[np.ix_(kept, kept)]
            separated = not (sub & ~np.eye(len(kept), dtype=bool)).any()
            maximal = close[:, kept].any(axis=1).all()
            if [states[i] for i in kept] != ref:
                problems.append(f"{cloud.label}: kernel and reference greedy disagree")
            if not (separated and maximal and len(kept) <= opt):
                problems.append(f"{cloud.label}: greedy {len(kept)} vs optimum {opt}")
            if monotone and 2 * len(kept) < opt:
                problems.append(f"{cloud.label}: greedy {len(kept)} below half of {opt}")
    return not problems, f"{trials} clouds, " + ("all consistent" if not problems else "; ".join(problems[:3]))


@_timed(11, "fixed points of SF_2(f) on the suspension grid")
def check_fixed_classes(session: Session):
    f = parse_system("square")
    grid = susp_grid(hyper_grid(build_grid(f.space, 1 / 16), 2), 1)
    got = fixed_points_of_induced_S(f, grid)
    want = [collapsed_point(f.space, 2, 1),
            SuspPoint(f.space, 1, 2, FinSet.of(f.declared_fixed, 2))]
    return set(got) == set(want) and len(got) == len(want), f"{got} on {len(grid)} grid classes"


# ---------------------------------------------------------------------------
# Slope checks
# ---------------------------------------------------------------------------

BASE = dict(mode="base", mesh=1 / 512, eps=(1 / 32, 1 / 64, 1 / 128), nmax=512)


def _base(session, system="square", f=None, key=""):
    return session.run(f, key=key, system=system, **BASE)


@_timed(1, "base slope, square map on [0,1]")
def check_base_square(session: Session):
    h = _base(session).headline
    t = session.seconds(system="square", **BASE)
    return 0.75 <= h <= 1.25 and t < 30, f"headline {_f(h)} in [0.75, 1.25], {t:.1f}s < 30s"


@_timed(1, "base slope, north-south circle map")
def check_base_circle(session: Session):
    h = _base(session, "north-south").headline
    t = session.seconds(system="north-south", **BASE)
    return 0.75 <= h <= 1.25 and t < 30, f"headline {_f(h)} in [0.75, 1.25], {t:.1f}s < 30s"


def _lift(session, mode, n, m=1, system="square"):
    return session.run(system=system, mode=mode, n_fold=n, m=m)


@_timed(2, "fn(2) and susp(2,1) slopes on the 64-point base")
def check_theorem_n2(session: Session):
    t = time.perf_counter()
    fn = _lift(session, "fn", 2).headline
    sp = _lift(session, "susp", 2).headline
    t = time.perf_counter() - t
    ok = 1.6 <= fn <= 2.4 and 1.6 <= sp <= 2.4 and abs(fn - sp) <= 0.4 and t < 180
    return ok, f"fn {_f(fn)}, susp {_f(sp)}, |diff| {_f(abs(fn - sp))} <= 0.4"


@_timed(3, "fn(3) slope on the 32-point base")
def check_theorem_n3(session: Session):
    t = time.perf_counter()
    fn = _lift(session, "fn", 3).headline
    t = time.perf_counter() - t
    return 2.4 <= fn <= 3.6 and t < 600, f"fn {_f(fn)} in [2.4, 3.6]"


@_timed(4, "susp(3,2) slope against fn(3)")
def check_generalized_suspension(session: Session):
    fn = _lift(session, "fn", 3).headline
    sp = _lift(session, "susp", 3, 2).headline
    return abs(fn - sp) <= 0.5, f"susp(3,2) {_f(sp)}, fn(3) {_f(fn)}, |diff| {_f(abs(fn - sp))} <= 0.5"


@_timed(5, "distinct-tuples(2) slope against twice the base")
def check_distinct_tuples(session: Session):
    base = _base(session).headline
    tup = _lift(session, "distinct-tuples", 2).headline
    return abs(tup - 2 * base) <= 0.4, f"tuples {_f(tup)}, 2 x base {_f(2 * base)}, |diff| {_f(abs(tup - 2 * base))} <= 0.4"


IDENTITY_MODES = (dict(mode="base"), dict(mode="power", n_fold=2), dict(mode="product"),
                  dict(mode="fn", n_fold=2), dict(mode="fn", n_fold=3), dict(mode="susp", n_fold=2, m=1),
                  dict(mode="susp", n_fold=3, m=2), dict(mode="distinct-tuples", n_fold=2),
                  dict(mode="tuples", n_fold=2))


@_timed(6, "identity map in every estimator mode")
def check_identity(session: Session):
    worst = max(session.run(system="identity", **kw).headline for kw in IDENTITY_MODES)
    return worst <= 0.2, f"max headline {_f(worst)} <= 0.2 over {len(IDENTITY_MODES)} modes"


@_timed(6, "rotation by 1/3, base mode")
def check_rotation(session: Session):
    res = session.run(system="rotation:1/3", mode="base")
    per_eps: dict = {}
    for rec in res.raw.records:
        per_eps.setdefault(rec.epsilon, set()).add(rec.raw_separated)
    constant = all(len(v) == 1 for v in per_eps.values())
    return res.headline <= 0.2 and constant, \
        f"headline {_f(res.headline)} <= 0.2, counts n-independent: {constant}"


@_timed(7, "power: f against f^2")
def check_power(session: Session):
    h1 = _base(session).headline
    h2 = session.run(system="square", mode="power", n_fold=2, **{k: v for k, v in BASE.items() if k != "mode"}).headline
    return abs(h1 - h2) <= 0.3, f"f {_f(h1)}, f^2 {_f(h2)}, |diff| {_f(abs(h1 - h2))} <= 0.3"


@_timed(7, "product: f x f against twice f")
def check_product(session: Session):
    h1 = _base(session).headline
    h2 = session.run(system="square", mode="product").headline
    return abs(h2 - 2 * h1) <= 0.5, f"f x f {_f(h2)}, 2 x f {_f(2 * h1)}, |diff| {_f(abs(h2 - 2 * h1))} <= 0.5"


def cube_conjugate(f: MapSystem) -> MapSystem:
    return make_conjugate((lambda x: x ** 3, np.cbrt), f, "cube")


@_timed(7, "conjugacy through h(x) = x^3")
def check_conjugacy(session: Session):
    f = parse_system("square")
    h1 = _base(session).headline
    h2 = _base(session, f=cube_conjugate(f), key="cube").headline
    return abs(h1 - h2) <= 0.3, f"f {_f(h1)}, h f h^-1 {_f(h2)}, |diff| {_f(abs(h1 - h2))} <= 0.3"


@_timed(7, "factor inequality F_2(f) <= f x f")
def check_factor_fn(session: Session):
    fn = _lift(session, "fn", 2).headline
    tup = _lift(session, "tuples", 2).headline
    return fn <= tup + 0.3, f"fn {_f(fn)} <= tuples {_f(tup)} + 0.3"


@_timed(7, "factor inequality SF_2(f) <= F_2(f)")
def check_factor_susp(session: Session):
    fn = _lift(session, "fn", 2).headline
    sp = _lift(session, "susp", 2).headline
    return sp <= fn + 0.3, f"susp {_f(sp)} <= fn {_f(fn)} + 0.3"


@_timed(8, "wandering-point lower bound for susp(2,1)")
def check_lower_bound(session: Session):
    sp = _lift(session, "susp", 2).headline
    return sp >= 1.6, f"susp(2,1) {_f(sp)} >= 1.6"


@_timed(9, "sandwich on every record of the slope checks")
def check_sandwich_session(session: Session):
    bad = total = 0
    for group in session.record_groups():
        b, t = sandwich_failures(group)
        bad, total = bad + b, total + t
    return bad == 0, f"{bad} violations in {total} records"


# ---------------------------------------------------------------------------
# Coding
# ---------------------------------------------------------------------------

@_timed(10, "single-letter census on the square map")
def check_coding_single(session: Session):
    res = session.run(system="square", mode="coding")
    s = res.headline
    return 0.75 <= s <= 1.25, f"slope {_f(s)} in [0.75, 1.25]"


@_timed(10, "two-letter census on square x square")
def check_coding_product(session: Session):
    f = parse_system("square*square")
    cloud = transit_cloud(f, 1 / 8, 64)
    family = CodingFamily((box_letter("A", [(0.2, 0.3), (0.0, 1.0)]),
                           box_letter("B", [(0.0, 1.0), (0.2, 0.3)])))
    census = word_census(f, cloud, [4, 8, 16, 32, 64], family)
    return 1.5 <= census.slope <= 2.5, f"slope {_f(census.slope)} in [1.5, 2.5]"


@_timed(10, "empty family census")
def check_coding_empty(session: Session):
    f = parse_system("square")
    census = word_census(f, transit_cloud(f, 1 / 64, 64), [4, 8, 16, 32, 64], CodingFamily(()))
    return census.slope == 0.0, f"slope {census.slope!r} == 0"


SUITES: dict[str, tuple[Check, ...]] = {
    "metrics": (check_base_metric, check_hausdorff_metric, check_collapse_metric, check_dist_to_Fm),
    "dynamics": (check_semiconjugacy, check_q_diagram, check_iterate_identity, check_sandwich,
                 check_packing_oracle, check_fixed_classes),
    "theorem": (check_base_square, check_base_circle, check_theorem_n2, check_theorem_n3,
                check_generalized_suspension, check_distinct_tuples, check_identity, check_rotation,
                check_power, check_product, check_conjugacy, check_factor_fn, check_factor_susp,
                check_lower_bound, check_sandwich_session),
    "coding": (check_coding_single, check_coding_product, check_coding_empty),
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def suite_checks(name: str) -> tuple[Check, ...]:
    if name == "all":
        return tuple(itertools.chain.from_iterable(SUITES.values()))
    if name not in SUITES:
        raise InputError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    return SUITES[name]


def verify(suite: str, session: Session | None = None,
           emit: Callable[[str], None] | None = None) -> list[CheckResult]:
    """Run a suite; ``emit`` receives each result line as soon as it is known."""
    session = Session() if session is None else session
    out = []
    for check in suite_checks(suite):
        res = check(session)
        out.append(res)
        if emit is not None:
            emit(res.line())
    return out
