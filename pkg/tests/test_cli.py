"""Command-line interface: subcommands, formats, exit codes."""

import json

import pytest

from riskdiv.cli import cli_main


def run(capsys, *argv):
    code = cli_main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestLoading:
    def test_prints_reference_value(self, capsys):
        code, out, _ = run(capsys, "loading", "--model", "iid", "--N", "1",
                           "--p", "0.1667", "--measure", "var")
        assert code == 0
        assert out.strip() == "3.000"

    def test_tvar_convention_flag(self, capsys):
        code, out, _ = run(capsys, "loading", "--model", "iid", "--N", "1",
                           "--p", "0.1667", "--measure", "tvar",
                           "--convention", "tail-average")
        assert code == 0
        assert float(out) > 3.0

    def test_mc_source_reports_standard_error(self, capsys):
        code, out, _ = run(capsys, "loading", "--model", "iid", "--N", "10",
                           "--measure", "var", "--source", "mc",
                           "--sims", "20000", "--seed", "3")
        assert code == 0
        assert "se=" in out


class TestTableAndVerify:
    def test_table_then_verify_clean(self, capsys, tmp_path):
        out_file = tmp_path / "t1.csv"
        code, _, _ = run(capsys, "table", "--id", "T1", "--out", str(out_file))
        assert code == 0 and out_file.exists()
        code, out, _ = run(capsys, "verify", "--id", "T1")
        assert code == 0
        assert "0 unexpected" in out

    def test_verify_documents_known_erratum(self, capsys):
        code, out, _ = run(capsys, "verify", "--id", "T2")
        assert code == 0
        assert "documented erratum" in out

    def test_verify_fails_on_unexpected_flag(self, capsys, monkeypatch):
        import riskdiv.cli as cli
        from riskdiv.tables import Table, build_table, TableRequest

        real = build_table(TableRequest(table_id="T2"))
        rows = [list(r) for r in real.rows]
        rows[0][2] = "9.999"

        monkeypatch.setattr(cli, "build_table", lambda req: Table("T2", real.headers, rows))
        code, out, _ = run(capsys, "verify", "--id", "T2")
        assert code == 1
        assert "unexpected" in out

    def test_json_format(self, capsys):
        code, out, _ = run(capsys, "table", "--id", "T1", "--format", "json")
        assert code == 0
        rows = json.loads(out)
        assert rows[0]["pmf"] == "0.33490"


class TestSimulate:
    def test_byte_identical_across_workers(self, capsys, tmp_path):
        texts = []
        for workers, name in ((1, "a.csv"), (2, "b.csv")):
            path = tmp_path / name
            code, _, _ = run(capsys, "simulate", "--model", "crisis", "--N", "20",
                             "--ptilde", "0.001", "--sims", "60000", "--seed", "42",
                             "--block-size", "20000", "--workers", str(workers),
                             "--out", str(path))
            assert code == 0
            texts.append(path.read_bytes())
        assert texts[0] == texts[1]

    def test_histogram_totals(self, capsys):
        code, out, _ = run(capsys, "simulate", "--model", "iid", "--N", "2",
                           "--sims", "5000", "--seed", "1")
        assert code == 0
        lines = out.strip().splitlines()[1:]
        assert sum(int(line.split(",")[1]) for line in lines) == 5000


class TestDist:
    def test_emits_pmf_rows(self, capsys):
        code, out, _ = run(capsys, "dist", "--model", "common", "--N", "1",
                           "--ptilde", "0.01")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "k,policy_loss,pmf,cdf"
        assert len(lines) == 8
        assert abs(sum(float(l.split(",")[2]) for l in lines[1:]) - 1.0) < 1e-9


class TestConverge:
    def test_rows_per_budget(self, capsys):
        code, out, _ = run(capsys, "converge", "--model", "crisis", "--N", "20",
                           "--ptilde", "0.01", "--measure", "tvar",
                           "--sims-list", "20000,40000", "--seed", "5")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "sims,loading"
        assert [l.split(",")[0] for l in lines[1:]] == ["20000", "40000"]


class TestErrors:
    def test_unknown_flag_exits_2(self, capsys):
        assert run(capsys, "loading", "--bogus")[0] == 2

    def test_unknown_subcommand_exits_2(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2

    def test_no_subcommand_exits_2(self, capsys):
        assert run(capsys)[0] == 2

    def test_support_guard_reported(self, capsys, monkeypatch):
        monkeypatch.setenv("RISKDIV_MAX_SUPPORT", "50")
        code, _, err = run(capsys, "dist", "--model", "iid", "--N", "100")
        assert code == 1
        assert "600" in err and "50" in err

    def test_bad_probability_reported(self, capsys):
        code, _, err = run(capsys, "loading", "--model", "iid", "--N", "1", "--p", "1.5")
        assert code == 1
        assert "error" in err
