import pytest

from polyent.cli import EXIT_CAP, EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main
from polyent.experiment import parse_csv
from polyent import verify as verify_mod


def test_estimate_to_stdout(capsys):
    assert main(["estimate", "--system", "identity", "--mesh", "1/32", "--nmax", "32"]) == EXIT_OK
    rows = parse_csv(capsys.readouterr().out)
    assert rows and all(r.system == "identity" for r in rows)


def test_estimate_with_config_file_and_report(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "rows.csv"
    cfg.write_text(f"system = square\nmode = fn\nnfold = 2\nbase_points = 32\nnmax = 32\nout = {out}\n")
    assert main(["estimate", "--config", str(cfg), "--jobs", "2"]) == EXIT_OK
    assert "headline square fn" in capsys.readouterr().out
    assert main(["report", str(out)]) == EXIT_OK
    assert "headline square fn n=2" in capsys.readouterr().out


def test_coding_command(capsys):
    assert main(["coding", "--system", "square", "--mesh", "1/64", "--nmax", "64", "--letters", "K=0.2:0.3"]) == EXIT_OK
    rows = parse_csv(capsys.readouterr().out)
    assert rows[-1].slope == pytest.approx(0.967452)


def test_exit_codes(monkeypatch, tmp_path, capsys):
    assert main(["estimate", "--mode", "susp", "--nfold", "2", "--m", "2"]) == EXIT_CONFIG
    assert "m:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["estimate", "--bogus"])
    assert exc.value.code == EXIT_CONFIG
    assert main(["report", str(tmp_path / "none.csv")]) == EXIT_CONFIG
    monkeypatch.setenv("POLYENT_CAP", "100")
    assert main(["estimate", "--mode", "fn", "--nfold", "2"]) == EXIT_CAP


def test_verify_exit_status(monkeypatch, capsys):
    @verify_mod._timed(0, "always passes")
    def fine(session):
        return True, "ok"

    @verify_mod._timed(0, "always fails")
    def broken(session):
        return False, "forced"

    monkeypatch.setitem(verify_mod.SUITES, "metrics", (fine, fine))
    assert main(["verify", "metrics"]) == EXIT_OK
    assert "2/2 checks passed" in capsys.readouterr().out
    monkeypatch.setitem(verify_mod.SUITES, "metrics", (fine, broken))
    assert main(["verify", "metrics"]) == EXIT_CHECK
    assert "[FAIL]  0 always fails: forced" in capsys.readouterr().out
