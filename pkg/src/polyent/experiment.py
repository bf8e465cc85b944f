"""Experiment configuration, dispatch to the estimators, and CSV reports."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from .entropy import (
    CodingFamily,
    OrbitCloud,
    box_letter,
    estimate_hpol,
    hyper_cloud,
    susp_cloud,
    transit_cloud,
    tuple_cloud,
    word_census,
)
from .entropy.clouds import cloud_from_points, fundamental_anchors
from .errors import InputError
from .hyperspace import check_cap
from .maps import MapSystem, make_power, make_product, parse_system
from .spaces import CIRCLE_KIND, build_grid

MODES = ("base", "power", "product", "fn", "susp", "distinct-tuples", "tuples", "coding")
LIFTED = ("fn", "susp", "distinct-tuples", "tuples")
CSV_COLUMNS = ("system", "mode", "n_fold", "m", "epsilon", "time_depth",
               "separated", "covering", "slope", "residual")


class ConfigError(InputError):
    """Invalid experiment configuration; the message names the field."""

    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.field = name


def default_eps(mesh: float) -> tuple[float, ...]:
    """mesh * (16, 8, 4), keeping scales up to 1/4 (the circle has diameter 1/2).

    Coarse meshes with no such multiple fall back to eps = mesh.
    """
    eps = tuple(mesh * c for c in (16, 8, 4) if mesh * c <= 0.25)
    return eps or (mesh,)


def default_n_list(nmax: int) -> tuple[int, ...]:
    """Powers of two from 4 up to nmax."""
    out = []
    n = 4
    while n <= nmax:
        out.append(n)
        n *= 2
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    system: str = "square"
    mode: str = "base"
    n_fold: int = 1          # n for lifted modes, k for power mode
    m: int = 1               # collapsed level for susp mode
    mesh: float = 0.0        # 0 picks the mode default (see _auto)
    eps: tuple[float, ...] = ()       # empty means default_eps(mesh)
    nmax: int = 0            # 0 picks the mode default
    window: float = 0.5
    base_points: int = 0     # size of the base cloud; 0 is the full transit cloud (lifted modes: mode default)
    second: str = ""         # product mode: second factor (default: the system itself)
    letters: str = ""        # coding mode: "K=0.2:0.3" or "A=0.2:0.3,0:1;B=0:1,0.2:0.3"
    out: str = ""
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        for name, value in _auto(self).items():
            if not getattr(self, name):
                object.__setattr__(self, name, value)
        if not (isinstance(self.mesh, (int, float)) and 0 < self.mesh <= 1):
            raise ConfigError("mesh", f"must be in (0, 1], got {self.mesh}")
        if self.nmax < 16:
            raise ConfigError("nmax", f"needs at least 16 for three depths 4, 8, 16; got {self.nmax}")
        if not 0 < self.window <= 1:
            raise ConfigError("window", f"must be in (0, 1], got {self.window}")
        if self.jobs < 1:
            raise ConfigError("jobs", f"must be >= 1, got {self.jobs}")
        if self.base_points < 0:
            raise ConfigError("base_points", "must be >= 0")
        if any(not 0 < e <= 1 for e in self.eps):
            raise ConfigError("eps", f"every eps must be in (0, 1], got {list(self.eps)}")
        if any(a <= b for a, b in zip(self.eps, self.eps[1:])):
            raise ConfigError("eps", f"must be strictly decreasing, got {list(self.eps)}")
        if self.mode in ("fn", "distinct-tuples", "tuples") and self.n_fold < 2:
            raise ConfigError("n_fold", f"mode {self.mode} requires n >= 2, got {self.n_fold}")
        if self.mode == "susp" and not self.n_fold > self.m >= 1:
            raise ConfigError("m", f"susp requires n > m >= 1, got n={self.n_fold}, m={self.m}")
        if self.mode == "power" and self.n_fold < 1:
            raise ConfigError("n_fold", f"power mode requires k >= 1, got {self.n_fold}")

    @property
    def eps_list(self) -> tuple[float, ...]:
        return self.eps or default_eps(self.mesh)

    @property
    def n_list(self) -> tuple[int, ...]:
        return default_n_list(self.nmax)

    @property
    def m_field(self) -> int:
        return self.m if self.mode == "susp" else 0

    @property
    def n_field(self) -> int:
        if self.mode in LIFTED or self.mode == "power":
            return self.n_fold
        return 2 if self.mode == "product" else 1


def _auto(cfg: ExperimentConfig) -> dict:
    """Mode defaults. Lifted modes run on one-anchor transit bases at mesh 1/4:
    64 states for n = 2 and 32 states for n >= 3, with depths up to the base size."""
    if cfg.mode in LIFTED:
        size = 64 if cfg.n_fold <= 2 else 32
        return {"mesh": 0.25, "base_points": size, "nmax": cfg.base_points or size}
    if cfg.mode == "product" or (cfg.mode == "coding" and "*" in cfg.system):
        return {"mesh": 0.125, "nmax": 64}
    return {"mesh": 1 / 512, "nmax": 512}


# ---------------------------------------------------------------------------
# Flat key = value config files
# ---------------------------------------------------------------------------

_ALIASES = {"nfold": "n_fold", "n": "n_fold", "base-points": "base_points"}


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise ConfigError(name, "unknown configuration key")
    kind = kinds[name]
    try:
        if name == "eps":
            return tuple(_number(tok) for tok in raw.split(",") if tok.strip())
        if kind == "int":
            return int(raw)
        if kind == "float":
            return _number(raw)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(name, f"cannot parse {raw!r}") from None
    return raw


def _number(tok: str) -> float:
    tok = tok.strip()
    if "/" in tok:
        p, q = tok.split("/", 1)
        return float(p) / float(q)
    return float(tok)


def parse_config_text(text: str) -> dict:
    """Key = value lines; '#' starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key.replace("-", "_"))
        out[key] = _coerce(key, value)
    return out


def make_config(values: dict) -> ExperimentConfig:
    values = {(_ALIASES.get(k, k)): v for k, v in values.items() if v is not None}
    known = {f.name for f in fields(ExperimentConfig)}
    for k in values:
        if k not in known:
            raise ConfigError(k, "unknown configuration key")
    return ExperimentConfig(**values)


# ---------------------------------------------------------------------------
# Clouds per mode
# ---------------------------------------------------------------------------


def _system(cfg: ExperimentConfig) -> MapSystem:
    f = parse_system(cfg.system)
    if cfg.mode == "power":
        return make_power(f, cfg.n_fold)
    if cfg.mode == "product":
        return make_product(f, parse_system(cfg.second) if cfg.second else f)
    return f


def base_cloud(f: MapSystem, mesh: float, horizon: int, base_points: int = 0) -> OrbitCloud:
    """Transit cloud of f, optionally trimmed to exactly ``base_points`` states.

    A sized base keeps only backward shifts: anchors x (shifts 0..J) plus the
    fixed points. Globally periodic maps get a uniform grid of that size.
    """
    if not base_points:
        if f.factors and f.period is None:
            sizes = 1
            for g in f.factors:
                sizes *= len(transit_cloud(g, mesh, 1, back=horizon + 16)) if g.period is None \
                    else len(build_grid(g.space, mesh))
            check_cap(sizes, what="product cloud")
        return transit_cloud(f, mesh, horizon)
    if f.period is not None:
        k = base_points if f.space.kind == CIRCLE_KIND else base_points - 1
        if f.space.dimension != 1 or k < 1:
            raise ConfigError("base_points", "sized grids need a one-dimensional system with >= 2 points")
        grid = build_grid(f.space, 1.0 / k)
        return cloud_from_points(f, grid.points, horizon, label=f.label)
    if f.factors:
        raise ConfigError("base_points", "sized bases are only defined for one-dimensional systems")
    anchors = len(fundamental_anchors(f, mesh))
    free = base_points - len(f.declared_fixed)
    if free < anchors or free % anchors:
        raise ConfigError("base_points", f"{base_points} - {len(f.declared_fixed)} fixed points is not a "
                                         f"positive multiple of the {anchors} anchors at mesh {mesh:g}")
    return transit_cloud(f, mesh, horizon, back=free // anchors - 1, ahead=0)


def build_cloud(cfg: ExperimentConfig, f: MapSystem | None = None) -> OrbitCloud:
    f = _system(cfg) if f is None else f
    base = base_cloud(f, cfg.mesh, cfg.nmax, cfg.base_points)
    if cfg.mode == "fn":
        return hyper_cloud(base, cfg.n_fold)
    if cfg.mode == "susp":
        return susp_cloud(base, cfg.n_fold, cfg.m)
    if cfg.mode == "distinct-tuples":
        return tuple_cloud(base, cfg.n_fold, distinct=True)
    if cfg.mode == "tuples":
        return tuple_cloud(base, cfg.n_fold, distinct=False)
    return base


def parse_letters(text: str, dim: int) -> CodingFamily:
    """``A=0.2:0.3,0:1;B=0:1,0.2:0.3``: one closed box per letter, one lo:hi per coordinate."""
    letters = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        label, _, body = part.partition("=")
        try:
            bounds = [tuple(_number(v) for v in iv.split(":")) for iv in body.split(",")]
        except ValueError:
            raise ConfigError("letters", f"cannot parse {part!r}") from None
        if len(bounds) != dim or any(len(b) != 2 for b in bounds):
            raise ConfigError("letters", f"letter {label!r} needs {dim} lo:hi ranges")
        letters.append(box_letter(label.strip(), bounds))
    return CodingFamily(tuple(letters))


def default_family(f: MapSystem) -> CodingFamily:
    """K = [0.2, 0.3] on one-dimensional systems; K x X and X x K on products."""
    dim = f.space.dimension
    if dim == 1:
        return CodingFamily((box_letter("K", [(0.2, 0.3)]),))
    letters = []
    for d in range(dim):
        bounds = [(0.0, 1.0)] * dim
        bounds[d] = (0.2, 0.3)
        letters.append(box_letter(f"K{d + 1}", bounds))
    return CodingFamily(tuple(letters))


# ---------------------------------------------------------------------------
# Result rows and CSV
# ---------------------------------------------------------------------------


def _sig6(x: float | None) -> float | None:
    if x is None:
        return None
    x = float(x)
    return x if not math.isfinite(x) else float(f"{x:.6g}")


@dataclass(frozen=True)
class ResultRow:
    """One count record (slope empty) or one per-eps summary (time_depth empty).

    Reals are stored at 6 significant digits, the precision of the CSV.
    Coding rows carry word counts in ``separated`` and no epsilon.
    """
    system: str
    mode: str
    n_fold: int
    m: int
    epsilon: float | None
    time_depth: int | None
    separated: int | None
    covering: int | None
    slope: float | None = None
    residual: float | None = None

    def __post_init__(self):
        for name in ("epsilon", "slope", "residual"):
            object.__setattr__(self, name, _sig6(getattr(self, name)))

    @property
    def is_summary(self) -> bool:
        return self.time_depth is None


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    rows: tuple[ResultRow, ...]
    cloud_size: int = 0
    raw: object = field(default=None, repr=False, compare=False)

    @property
    def headline(self) -> float:
        return headline(self.rows)


def headline(rows: Iterable[ResultRow]) -> float:
    """Slope of the summary row with the smallest epsilon (coding: the census slope)."""
    summaries = [r for r in rows if r.is_summary]
    if not summaries:
        raise InputError("no summary rows")
    eps_rows = [r for r in summaries if r.epsilon is not None]
    if eps_rows:
        return min(eps_rows, key=lambda r: r.epsilon).slope
    return summaries[0].slope


def run(cfg: ExperimentConfig, f: MapSystem | None = None) -> ExperimentResult:
    """Run one experiment and return its rows (CSV written if cfg.out is set)."""
    f = _system(cfg) if f is None else f
    label = f.label
    if cfg.mode == "coding":
        family = parse_letters(cfg.letters, f.space.dimension) if cfg.letters else default_family(f)
        cloud = base_cloud(f, cfg.mesh, cfg.nmax, cfg.base_points)
        census = word_census(f, cloud, cfg.n_list, family, cfg.window)
        rows = [ResultRow(label, cfg.mode, cfg.n_field, 0, None, n, c, None) for n, c in census.counts]
        rows.append(ResultRow(label, cfg.mode, cfg.n_field, 0, None, None, None, None,
                              census.slope, census.residual))
        result = ExperimentResult(cfg, tuple(rows), len(cloud), census)
    else:
        cloud = build_cloud(cfg, f)
        table = estimate_hpol(cloud, cfg.eps_list, cfg.n_list, cfg.window, cfg.jobs)
        rows = []
        for s in table.rows:
            for rec in table.records:
                if rec.epsilon == s.epsilon:
                    rows.append(ResultRow(label, cfg.mode, cfg.n_field, cfg.m_field, rec.epsilon,
                                          rec.time_depth, rec.separated, rec.covering))
            rows.append(ResultRow(label, cfg.mode, cfg.n_field, cfg.m_field, s.epsilon, None, None, None,
                                  s.slope, s.residual))
        result = ExperimentResult(cfg, tuple(rows), len(cloud), table)
    if cfg.out:
        write_csv(result.rows, cfg.out)
    return result


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    return list(run(cfg).rows)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def emit_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(emit_csv(rows))


def parse_csv(text: str) -> list[ResultRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if tuple(header) != CSV_COLUMNS:
        raise InputError(f"unexpected CSV header {header}")

    def opt(v, kind):
        return None if v == "" else kind(v)

    rows = []
    for rec in reader:
        if not rec:
            continue
        if len(rec) != len(CSV_COLUMNS):
            raise InputError(f"CSV row has {len(rec)} fields, expected {len(CSV_COLUMNS)}")
        system, mode, n_fold, m, eps, depth, sep, cov, slope, res = rec
        rows.append(ResultRow(system, mode, int(n_fold), int(m), opt(eps, float), opt(depth, int),
                              opt(sep, int), opt(cov, int), opt(slope, float), opt(res, float)))
    return rows


def read_csv(path: str | Path) -> list[ResultRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read())


def format_table(rows: Sequence[ResultRow]) -> str:
    """Aligned text table of the rows, followed by the headline per (system, mode)."""
    cells = [list(CSV_COLUMNS)] + [[_fmt(getattr(r, c)) for c in CSV_COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(CSV_COLUMNS))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.system, r.mode, r.n_fold, r.m), []).append(r)
    for (system, mode, n, m), rs in groups.items():
        if any(r.is_summary for r in rs):
            lines.append(f"headline {system} {mode} n={n} m={m}: {_fmt(headline(rs))}")
    return "\n".join(lines) + "\n"


def report(rows: Sequence[ResultRow], path: str | Path | None = None) -> str:
    """Formatted table of the rows; the CSV goes to ``path`` when given."""
    if path is not None:
        write_csv(rows, path)
    return format_table(rows)


__all__ = [
    "CSV_COLUMNS", "ConfigError", "ExperimentConfig", "ExperimentResult", "MODES", "ResultRow",
    "base_cloud", "build_cloud", "default_eps", "default_family", "default_n_list", "emit_csv",
    "format_table", "headline", "make_config", "parse_config_text", "parse_csv", "parse_letters",
    "read_csv", "report", "run", "run_experiment", "write_csv",
]
