import pytest
from hypothesis import given, strategies as st

from polyent.errors import ResourceError
from polyent.experiment import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    ResultRow,
    default_eps,
    default_n_list,
    emit_csv,
    headline,
    make_config,
    parse_config_text,
    parse_csv,
    parse_letters,
    report,
    run,
    run_experiment,
)

HEADER = ",".join(CSV_COLUMNS) + "\n"


@pytest.mark.parametrize("kw,field", [
    (dict(mode="fn", n_fold=1), "n_fold"),
    (dict(mode="susp", n_fold=2, m=2), "m"),
    (dict(mode="tent"), "mode"),
    (dict(mesh=1.5), "mesh"),
    (dict(eps=(0.1, 0.2)), "eps"),
    (dict(nmax=8), "nmax"),
    (dict(window=0), "window"),
    (dict(jobs=0), "jobs"),
])
def test_validation_names_the_field(kw, field):
    with pytest.raises(ConfigError) as err:
        ExperimentConfig(**kw)
    assert err.value.field == field
    assert str(err.value).startswith(field)


def test_mode_defaults():
    assert ExperimentConfig().mesh == 1 / 512 and ExperimentConfig().nmax == 512
    fn3 = ExperimentConfig(mode="fn", n_fold=3)
    assert (fn3.mesh, fn3.base_points, fn3.nmax) == (0.25, 32, 32)
    assert ExperimentConfig(mode="susp", n_fold=2).base_points == 64
    pc = ExperimentConfig(mode="coding", system="square*square")
    assert (pc.mesh, pc.nmax) == (0.125, 64)
    assert default_eps(1 / 512) == (1 / 32, 1 / 64, 1 / 128)
    assert default_eps(0.25) == (0.25,)
    assert default_n_list(512) == (4, 8, 16, 32, 64, 128, 256, 512)


def test_config_text():
    values = parse_config_text("# comment\nsystem = north-south:0.5\nnfold = 2\neps = 1/8, 1/16\nmesh=1/64\n")
    cfg = make_config(values)
    assert cfg.system == "north-south:0.5" and cfg.n_fold == 2
    assert cfg.eps == (0.125, 0.0625) and cfg.mesh == 1 / 64
    with pytest.raises(ConfigError):
        parse_config_text("colour = red")
    with pytest.raises(ConfigError):
        parse_config_text("nmax = lots")
    with pytest.raises(ConfigError):
        parse_config_text("just words")


def test_letters():
    fam = parse_letters("A=0.2:0.3,0:1;B=0:1,0.2:0.3", 2)
    assert fam.labels == ("A", "B", "Y_inf")
    with pytest.raises(ConfigError):
        parse_letters("A=0.2:0.3", 2)


def test_csv_examples():
    assert emit_csv([]) == HEADER
    row = ResultRow("square", "base", 1, 0, 0.25, 4, 5, 5)
    text = emit_csv([row])
    assert text.count("\n") == 2 and "\r" not in text
    assert parse_csv(text) == [row]


def test_six_significant_digits():
    row = ResultRow("s", "base", 1, 0, 1 / 3, None, None, None, 2 / 3, 1e-7 / 3)
    assert emit_csv([row]).splitlines()[1] == "s,base,1,0,0.333333,,,,0.666667,3.33333e-08"


reals = st.one_of(st.none(), st.floats(allow_nan=False, allow_infinity=False, width=64))
ints = st.one_of(st.none(), st.integers(0, 10 ** 9))
labels = st.text(st.characters(blacklist_categories=("Cc", "Cs")), min_size=1, max_size=12)
rows = st.builds(ResultRow, labels,
                 st.sampled_from(["base", "fn", "susp", "coding"]), st.integers(1, 4), st.integers(0, 3),
                 reals, ints, ints, ints, reals, reals)


@given(st.lists(rows, max_size=6))
def test_round_trip(rs):
    assert parse_csv(emit_csv(rs)) == rs


def test_identity_run():
    res = run(ExperimentConfig(system="identity", mode="base", mesh=1 / 64, nmax=64))
    cfg = res.config
    records = [r for r in res.rows if not r.is_summary]
    summaries = [r for r in res.rows if r.is_summary]
    assert len(records) == len(cfg.eps_list) * len(cfg.n_list)
    assert len(summaries) == len(cfg.eps_list)
    assert res.headline == 0.0 == headline(res.rows)


def test_byte_identical_reruns(tmp_path):
    cfg = dict(system="square", mode="fn", n_fold=2, base_points=32, nmax=32)
    a = emit_csv(run_experiment(ExperimentConfig(**cfg, jobs=1)))
    b = emit_csv(run_experiment(ExperimentConfig(**cfg, jobs=4)))
    assert a == b
    out = tmp_path / "r.csv"
    run(ExperimentConfig(**cfg, out=str(out)))
    assert out.read_bytes() == a.encode("utf-8")


def test_coding_rows():
    res = run(ExperimentConfig(system="square", mode="coding", mesh=1 / 64, nmax=64))
    counts = [(r.time_depth, r.separated) for r in res.rows if not r.is_summary]
    assert counts == [(n, n + 1) for n in (4, 8, 16, 32, 64)]
    assert 0.75 <= res.headline <= 1.25


def test_sized_base_errors():
    with pytest.raises(ConfigError) as err:
        run(ExperimentConfig(system="square", mode="fn", n_fold=2, base_points=21, mesh=1 / 8))
    assert err.value.field == "base_points"


def test_resource_cap_surfaces(monkeypatch):
    monkeypatch.setenv("POLYENT_CAP", "100")
    with pytest.raises(ResourceError):
        run(ExperimentConfig(system="square", mode="fn", n_fold=2))


def test_report(tmp_path):
    rows = run_experiment(ExperimentConfig(system="identity", mesh=1 / 32, nmax=32))
    path = tmp_path / "out.csv"
    table = report(rows, path)
    assert "headline identity base" in table
    assert parse_csv(path.read_text(encoding="utf-8")) == rows
    with pytest.raises(OSError):
        report(rows, tmp_path / "missing" / "out.csv")
