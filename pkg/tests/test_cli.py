import json

import pytest

from binreg.cli import main


BALANCED = "x,y\n0,1\n1,0\n2,0\n3,1\n"
SEPARATED = "x,y\n1,0\n2,0\n3,1\n4,1\n"
OVERLAPPING = "x,y\n1,0\n3,0\n2,1\n4,1\n"


@pytest.fixture
def csvs(tmp_path):
    paths = {}
    for name, content in [("bal", BALANCED), ("sep", SEPARATED), ("olap", OVERLAPPING)]:
        p = tmp_path / f"{name}.csv"
        p.write_text(content)
        paths[name] = str(p)
    return paths


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestFitCommand:
    def test_balanced_fit_json(self, capsys, csvs):
        code, out, _ = run_cli(capsys, "fit", "--link", "logit", "--csv", csvs["bal"])
        assert code == 0
        payload = json.loads(out)
        assert payload["schema"] == 1
        assert payload["status"] == "Converged"
        assert payload["alpha"] == pytest.approx(0.0, abs=1e-10)
        assert payload["beta"][0] == pytest.approx(0.0, abs=1e-10)

    def test_separated_refused_without_force(self, capsys, csvs):
        code, out, _ = run_cli(capsys, "fit", "--csv", csvs["sep"])
        assert code == 2
        payload = json.loads(out)
        assert payload["status"] == "Separated"
        assert "alpha" not in payload and "beta" not in payload

    def test_separated_forced_reports_divergence(self, capsys, csvs):
        code, out, _ = run_cli(capsys, "fit", "--csv", csvs["sep"], "--force")
        assert code == 0
        payload = json.loads(out)
        assert payload["status"] == "Diverged"
        assert payload["beta"][0] > 1e3

    def test_json_out_file(self, capsys, csvs, tmp_path):
        target = tmp_path / "result.json"
        code, out, _ = run_cli(capsys, "fit", "--csv", csvs["olap"], "--json-out", str(target))
        assert code == 0
        assert json.loads(target.read_text()) == json.loads(out)

    def test_reproducible_output_bytes(self, capsys, csvs):
        _, first, _ = run_cli(capsys, "fit", "--csv", csvs["olap"])
        _, second, _ = run_cli(capsys, "fit", "--csv", csvs["olap"])
        assert first == second


class TestOverlapCommand:
    def test_separated_exit_code(self, capsys, csvs):
        code, out, _ = run_cli(capsys, "overlap", "--csv", csvs["sep"])
        assert code == 2
        payload = json.loads(out)
        assert payload["verdict"] == "Separated"
        assert payload["direction_hint"] == 1

    def test_overlap_scalar_method(self, capsys, csvs):
        code, out, _ = run_cli(capsys, "overlap", "--csv", csvs["olap"], "--method", "scalar")
        assert code == 0
        payload = json.loads(out)
        assert payload["verdict"] == "Overlap"
        assert payload["bounds"] == {"L0": 1.0, "U0": 3.0, "L1": 2.0, "U1": 4.0}

    def test_overlap_cone_certificate(self, capsys, csvs):
        code, out, _ = run_cli(capsys, "overlap", "--csv", csvs["olap"], "--method", "cone")
        assert code == 0
        payload = json.loads(out)
        assert payload["verdict"] == "Overlap"
        assert payload["certificate"]["margin"] > 1e-9


class TestVerifyCommand:
    def test_small_run_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--theorem", "sign", "--link", "logit",
                               "--trials", "15", "--seed", "42")
        assert code == 0
        payload = json.loads(out)
        assert payload["total_failures"] == 0
        assert payload["results"][0]["trials"] == 15

    def test_all_theorems_small(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--theorem", "all", "--link", "logit",
                               "--trials", "5", "--seed", "1", "--dims", "2")
        assert code == 0
        payload = json.loads(out)
        theorems = {r["theorem"] for r in payload["results"]}
        assert theorems == {"SignMatch", "ZeroIffEqualMeans", "AcuteAngle"}

    def test_reproducible(self, capsys):
        args = ("verify", "--theorem", "zero", "--link", "logit", "--trials", "8", "--seed", "5")
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second


class TestSimulateCommand:
    def test_csv_to_stdout_then_fit(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "simulate", "--kind", "overlapping",
                               "--n", "12", "--d", "2", "--seed", "9")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "x0,x1,y"
        assert len(lines) == 13
        path = tmp_path / "sim.csv"
        path.write_text(out)
        code2, out2, _ = run_cli(capsys, "fit", "--csv", str(path))
        assert code2 == 0
        assert json.loads(out2)["status"] == "Converged"

    def test_gaussian_kind(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "--kind", "gaussian", "--n", "8",
                               "--seed", "3", "--mu0", "0,0", "--mu1", "1,0")
        assert code == 0
        assert out.splitlines()[0] == "x0,x1,y"


class TestErrorPaths:
    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "fit", "--csv", "/does/not/exist.csv")
        assert code == 1
        assert "error" in err.lower()

    def test_bad_cell_reports_position(self, capsys, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("x,y\n1,0\nbogus,1\n")
        code, _, err = run_cli(capsys, "fit", "--csv", str(p))
        assert code == 1
        assert "row 2" in err

    def test_unknown_flag(self, capsys):
        code, _, err = run_cli(capsys, "fit", "--nope")
        assert code == 1
        assert "usage" in err.lower()

    def test_plain_output(self, capsys, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text(OVERLAPPING)
        code, out, _ = run_cli(capsys, "overlap", "--csv", str(p), "--plain")
        assert code == 0
        assert "verdict: Overlap" in out
