import json
import math

import pytest

from xxzmagnon.cli import main


def run_cli(args):
    return main(list(args))


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# "), "metadata header line missing"
    meta = json.loads(lines[0][2:])
    header = lines[1].split(",")
    rows = [ln.split(",") for ln in lines[2:] if not ln.startswith("#")]
    footers = [ln for ln in lines[2:] if ln.startswith("#")]
    return meta, header, rows, footers


class TestSpectrumCommand:
    def test_csv_output_and_zero_sum(self, tmp_path):
        out = tmp_path / "spec.csv"
        assert run_cli(["spectrum", "--n", "33", "--q", "0", "--out", str(out)]) == 0
        meta, header, rows, _ = read_csv(out)
        assert header == ["omega", "intensity", "count", "class"]
        assert meta["n"] == 33 and meta["q"] == 0 and meta["subcommand"] == "spectrum"
        total = math.fsum(float(r[1]) for r in rows)
        assert abs(total) <= 1e-9
        assert {r[3] for r in rows} == {"dominant", "suppressed"}

    def test_json_output(self, tmp_path):
        out = tmp_path / "spec.json"
        assert run_cli(["spectrum", "--n", "9", "--q", "1", "--format", "json", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["metadata"]["format"] == "json"
        assert {p["class"] for p in doc["poles"]} == {"dominant", "suppressed"}

    def test_data_section_independent_of_workers(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(["spectrum", "--n", "9", "--q", "2", "--workers", "1", "--out", str(a)]) == 0
        assert run_cli(["spectrum", "--n", "9", "--q", "2", "--workers", "4", "--out", str(b)]) == 0
        data_a = a.read_text().splitlines()[1:]
        data_b = b.read_text().splitlines()[1:]
        assert data_a == data_b

    def test_full_mode_cap_is_a_validation_error(self, tmp_path):
        out = tmp_path / "spec.csv"
        assert run_cli(["spectrum", "--n", "99", "--q", "0", "--out", str(out)]) == 1

    def test_dominant_mode_allows_large_chains(self, tmp_path):
        out = tmp_path / "spec.csv"
        assert run_cli(["spectrum", "--n", "99", "--q", "0", "--mode", "dominant", "--out", str(out)]) == 0
        _, _, rows, _ = read_csv(out)
        assert {r[3] for r in rows} == {"dominant"}


class TestEvolveAndHeatmap:
    def test_evolve_series(self, tmp_path):
        out = tmp_path / "evolve.csv"
        assert run_cli(["evolve", "--n", "9", "--q", "1", "--tmax", "5", "--steps", "11",
                        "--out", str(out)]) == 0
        _, header, rows, _ = read_csv(out)
        assert header == ["t", "value"]
        assert len(rows) == 11
        assert abs(float(rows[0][1])) <= 1e-14

    def test_heatmap_shape_and_parity(self, tmp_path):
        out = tmp_path / "heat.csv"
        assert run_cli(["heatmap", "--n", "9", "--tmax", "4", "--steps", "5", "--out", str(out)]) == 0
        _, header, rows, _ = read_csv(out)
        assert header == ["t", "q", "value"]
        assert len(rows) == 9 * 5
        values = {(r[0], int(r[1])): r[2] for r in rows}
        for (t, q), v in values.items():
            assert values[(t, -q)] == v  # q <-> -q symmetry, bitwise

    def test_grid_validation(self, tmp_path):
        out = tmp_path / "x.csv"
        assert run_cli(["evolve", "--n", "9", "--q", "0", "--tmax", "-1", "--out", str(out)]) == 1
        assert run_cli(["evolve", "--n", "9", "--q", "0", "--steps", "1", "--out", str(out)]) == 1


class TestDerivativesCommand:
    def test_table_schema_and_agreement(self, tmp_path):
        out = tmp_path / "deriv.csv"
        assert run_cli(["derivatives", "--n", "17", "--q", "2", "--out", str(out)]) == 0
        _, header, rows, _ = read_csv(out)
        assert header == ["q", "kbar", "order", "exact_value", "moment_value", "exactness_flag"]
        assert len(rows) == 3  # kbar = 0, 1, 2
        for r in rows:
            q, kbar, order = int(r[0]), int(r[1]), int(r[2])
            exact, mom = float(r[3]), float(r[4])
            flag = r[5] == "true"
            assert order == 2 * (q + kbar)
            assert flag == (kbar < q)
            if flag:
                assert mom == pytest.approx(exact, rel=1e-6)


class TestTransientCommand:
    def test_three_columns(self, tmp_path):
        out = tmp_path / "trans.csv"
        assert run_cli(["transient", "--n", "33", "--q", "2", "--tmax", "2", "--steps", "9",
                        "--out", str(out)]) == 0
        _, header, rows, _ = read_csv(out)
        assert header == ["t", "exact", "bessel_approx"]
        assert len(rows) == 9
        assert abs(float(rows[0][1])) <= 1e-14 and float(rows[0][2]) == 0.0


class TestEdgeCommand:
    def test_arrivals_and_velocity_footer(self, tmp_path):
        out = tmp_path / "edge.csv"
        assert run_cli(["edge", "--n", "201", "--q-min", "5", "--q-max", "8", "--steps", "3000",
                        "--out", str(out)]) == 0
        _, header, rows, footers = read_csv(out)
        assert header == ["q", "arrival_time"]
        assert [int(r[0]) for r in rows] == [5, 6, 7, 8]
        taus = [float(r[1]) for r in rows]
        assert all(b > a for a, b in zip(taus, taus[1:]))
        assert len(footers) == 1 and footers[0].startswith("# fitted_velocity=")
        float(footers[0].split("=", 1)[1])  # parses as a number

    def test_json_variant(self, tmp_path):
        out = tmp_path / "edge.json"
        assert run_cli(["edge", "--n", "201", "--q-min", "5", "--q-max", "7", "--format", "json",
                        "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert "fitted_velocity" in doc and len(doc["per_q"]) == 3


class TestConfigFile:
    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text('n = 9\nq = 1\ntmax = 3.0\nsteps = 7\n')
        out = tmp_path / "evolve.csv"
        assert run_cli(["evolve", "--config", str(cfg), "--q", "2", "--out", str(out)]) == 0
        meta, _, rows, _ = read_csv(out)
        assert meta["n"] == 9 and meta["q"] == 2 and meta["tmax"] == 3.0
        assert len(rows) == 7

    def test_unknown_keys_rejected(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text('qq = 3\n')
        out = tmp_path / "x.csv"
        assert run_cli(["evolve", "--config", str(cfg), "--q", "0", "--out", str(out)]) == 1


class TestVerifyCommand:
    def test_quick_level_reports_every_criterion(self, capsys):
        code = run_cli(["verify", "--level", "quick"])
        lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("[")]
        assert len(lines) == 7  # the quick subset
        all_passed = all(ln.startswith("[PASS]") for ln in lines)
        assert code == (0 if all_passed else 2)
