import io
import json
import subprocess
import sys

import pytest

from corrtax.cli import main
from corrtax.panel import panel_to_csv, parse_panel, parse_returns
from corrtax.synth import CompetitionConfig, generate_competitive_market


def run(*args, stdin=None):
    """Run the CLI in a subprocess; returns (exit code, stdout, stderr)."""
    proc = subprocess.run(
        [sys.executable, "-m", "corrtax", *args],
        input=stdin,
        capture_output=True,
        text=True,
        encoding="utf-8",
    )
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture
def call(capsys, monkeypatch):
    def _call(*args, stdin=None):
        if stdin is not None:
            monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
        code = main(list(args))
        out, err = capsys.readouterr()
        return code, out, err

    return _call


@pytest.fixture
def sector_csv(tmp_path, call):
    code, out, _ = call("simulate", "--model", "sector", "--seed", "7", "--weeks", "120")
    assert code == 0
    path = tmp_path / "sector.csv"
    path.write_text(out, encoding="utf-8")
    return path


@pytest.fixture
def thirty_csv(tmp_path):
    panel = generate_competitive_market(CompetitionConfig(30, 200, seed=3))
    path = tmp_path / "thirty.csv"
    path.write_text(panel_to_csv(panel), encoding="utf-8")
    return path


class TestValidate:
    def test_ok(self, call, sector_csv):
        code, out, _ = call("validate", str(sector_csv))
        assert code == 0 and out.startswith("panel ok: 120 rows x 10 assets")

    def test_json(self, call, sector_csv):
        code, out, _ = call("validate", "--format", "json", str(sector_csv))
        doc = json.loads(out)
        assert code == 0 and doc["valid"] and doc["rows"] == 120

    def test_zero_rejected(self, call, tmp_path):
        path = tmp_path / "zero.csv"
        path.write_text("date,A,B\n2003-05-01,1,2\n2003-05-08,0,2\n2003-05-15,1,3\n")
        code, out, _ = call("validate", str(path))
        assert code == 1 and "'A'" in out and "2003-05-08" in out

    def test_floor_flag_and_env(self, call, tmp_path, monkeypatch):
        path = tmp_path / "zero.csv"
        path.write_text("date,A,B\n2003-05-01,1,2\n2003-05-08,0,2\n2003-05-15,1,3\n")
        assert call("validate", "--floor", "0.5", str(path))[0] == 0
        monkeypatch.setenv("CORRTAX_FLOOR", "0.5")
        assert call("validate", str(path))[0] == 0

    def test_missing_file_is_usage_error(self, call, tmp_path):
        code, _, err = call("validate", str(tmp_path / "nope.csv"))
        assert code == 2 and "cannot read" in err


class TestPipeline:
    def test_returns(self, call, sector_csv):
        code, out, _ = call("returns", str(sector_csv))
        assert code == 0
        assert parse_returns(out).n_rows == 119

    def test_census_thirty_assets(self, call, thirty_csv):
        code, out, _ = call("census", "--format", "json", str(thirty_csv))
        doc = json.loads(out)
        assert code == 0
        assert doc["strong"] + doc["weak"] + doc["negative"] == doc["pairs"] == 435

    def test_pairs_listing(self, call, sector_csv):
        code, out, _ = call("pairs", "--top", "5", str(sector_csv))
        lines = out.splitlines()
        assert code == 0 and len(lines) == 5
        for line in lines:
            rho, rest = line.split("  ", 1)
            assert float(rho) <= 1.0
            assert " – " in rest and rest.endswith(")") and "(d = " in rest

    def test_corr_formats(self, call, sector_csv):
        _, csv_out, _ = call("corr", "--format", "csv", str(sector_csv))
        assert csv_out.startswith("asset,a_01,")
        _, json_out, _ = call("corr", "--format", "json", str(sector_csv))
        assert len(json.loads(json_out)["rho"]) == 10
        _, dist_out, _ = call("corr", "--format", "json", "--distance", str(sector_csv))
        assert "d" in json.loads(dist_out)

    def test_mst_from_panel_or_matrix_agree(self, call, sector_csv, tmp_path):
        _, direct, _ = call("mst", "--format", "dot", str(sector_csv))
        _, matrix, _ = call("corr", "--format", "csv", str(sector_csv))
        (tmp_path / "corr.csv").write_text(matrix)
        _, via_matrix, _ = call("mst", "--format", "dot", str(tmp_path / "corr.csv"))
        _, dist_json, _ = call("corr", "--format", "json", "--distance", str(sector_csv))
        (tmp_path / "dist.json").write_text(dist_json)
        _, via_distance, _ = call("mst", "--format", "dot", str(tmp_path / "dist.json"))
        assert direct == via_matrix == via_distance
        assert direct.count(" -- ") == 9

    def test_mst_json_and_table(self, call, sector_csv):
        _, out, _ = call("mst", "--format", "json", str(sector_csv))
        assert len(json.loads(out)["edges"]) == 9
        _, table, _ = call("mst", str(sector_csv))
        assert table.splitlines()[-1].startswith("total weight")

    def test_tree(self, call, sector_csv):
        code, out, _ = call("tree", str(sector_csv))
        assert code == 0 and out.strip().endswith(";")
        _, table, _ = call("tree", "--format", "table", str(sector_csv))
        assert len(table.splitlines()) == 9

    def test_halflife(self, call, sector_csv):
        code, out, _ = call("halflife", "--width", "20", "--step", "5", "--format", "json", str(sector_csv))
        doc = json.loads(out)
        assert code == 0 and doc["fraction"][0] == 1.0
        assert len(doc["lags"]) == (119 - 20) // 5 + 1
        code, out, _ = call("halflife", "--width", "20", "--step", "5", "--format", "csv", str(sector_csv))
        assert out.startswith("lag,fraction\n0,1.0\n")

    def test_scaling(self, call, sector_csv):
        code, out, _ = call("scaling", "--widths", "10,20,30", "--step", "2", str(sector_csv))
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("# t_half =")
        assert all(len(line.split()) == 2 for line in lines[2:])
        code, out, _ = call("scaling", "--widths", "10,20,30", "--step", "2", "--format", "csv", str(sector_csv))
        assert out.startswith("width,half_life\n")

    def test_returns_kind(self, call, sector_csv, tmp_path):
        _, returns_csv, _ = call("returns", str(sector_csv))
        (tmp_path / "r.csv").write_text(returns_csv)
        _, a, _ = call("corr", "--format", "csv", "--kind", "returns", str(tmp_path / "r.csv"))
        _, b, _ = call("corr", "--format", "csv", str(sector_csv))
        assert a == b

    def test_does_not_modify_input(self, call, sector_csv):
        before = sector_csv.read_bytes()
        for cmd in (["validate"], ["returns"], ["corr"], ["mst"], ["tree"]):
            call(*cmd, str(sector_csv))
        assert sector_csv.read_bytes() == before

    def test_output_file(self, call, sector_csv, tmp_path):
        target = tmp_path / "out.dot"
        code, out, _ = call("mst", "--format", "dot", "-o", str(target), str(sector_csv))
        assert code == 0 and out == ""
        assert target.read_text().startswith("graph mst {")


class TestSimulate:
    def test_requires_seed(self, call):
        with pytest.raises(SystemExit) as exc:
            call("simulate", "--model", "sector")
        assert exc.value.code == 2

    def test_competition(self, call):
        code, out, _ = call("simulate", "--model", "competition", "--seed", "1", "--assets", "4", "--weeks", "30")
        panel = parse_panel(out)
        assert code == 0 and panel.n_assets == 4 and panel.n_rows == 30

    def test_config_file(self, call, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sectors": [{"label": "x", "members": 3, "loading": 1.0}], "weeks": 12}))
        code, out, _ = call("simulate", "--model", "sector", "--seed", "2", "--config", str(cfg))
        assert code == 0 and parse_panel(out).assets == ("x_01", "x_02", "x_03")

    def test_invalid_config_exit_1(self, call):
        code, _, err = call("simulate", "--model", "competition", "--seed", "1", "--churn", "1.5")
        assert code == 1 and "churn" in err

    def test_bad_sector_spec(self, call):
        with pytest.raises(SystemExit) as exc:
            call("simulate", "--model", "sector", "--seed", "1", "--sectors", "a:2")
        assert exc.value.code == 2


class TestUsage:
    def test_unknown_flag(self, call, sector_csv):
        with pytest.raises(SystemExit) as exc:
            call("census", "--bogus", str(sector_csv))
        assert exc.value.code == 2

    def test_unknown_format(self, call, sector_csv):
        with pytest.raises(SystemExit) as exc:
            call("census", "--format", "dot", str(sector_csv))
        assert exc.value.code == 2

    def test_no_subcommand(self, call):
        with pytest.raises(SystemExit) as exc:
            call()
        assert exc.value.code == 2

    def test_zero_variance_exit_1(self, call, tmp_path):
        path = tmp_path / "flat.csv"
        path.write_text("date,A,B\n2003-05-01,1,2\n2003-05-08,1,3\n2003-05-15,1,5\n")
        code, _, err = call("corr", str(path))
        assert code == 1 and "'A'" in err


class TestSubprocess:
    def test_stdin_pipeline_matches_staged_files(self, tmp_path):
        _, panel_text, _ = run("simulate", "--model", "sector", "--seed", "7")
        _, piped, _ = run("mst", "--format", "dot", "-", stdin=panel_text)
        (tmp_path / "p.csv").write_text(panel_text, encoding="utf-8")
        _, staged, _ = run("mst", "--format", "dot", str(tmp_path / "p.csv"))
        assert piped == staged and piped.startswith("graph mst {")

    def test_repeat_runs_identical(self):
        first = run("simulate", "--model", "competition", "--seed", "9", "--weeks", "60")
        second = run("simulate", "--model", "competition", "--seed", "9", "--weeks", "60")
        assert first == second and first[0] == 0
