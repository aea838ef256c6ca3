import csv
import math

import orjson
import pytest

from capflow.config import app_settings
from capflow.core.capacity.experiment import TABLE_COLUMNS
from tests.integration.conftest import read_json


def write_measure(path, atoms, masses):
    path.write_bytes(orjson.dumps({"atoms": atoms, "masses": masses}))
    return path


class TestGen:
    def test_cantor_generation_three(self, tmp_path, run_cli):
        path = tmp_path / "cantor.json"

        code, out = run_cli("gen", "--kind", "cantor4", "--generation", 3, "-o", path)

        document = read_json(path)
        assert code == 0
        assert out.split() == [str(path), "64"]
        assert len(document["atoms"]) == 64
        assert document["weights"] == "probability"
        assert document["metadata"]["command"] == "gen"

    def test_segment_weights_sum_to_its_length(self, segment_file):
        document = read_json(segment_file)

        assert math.fsum(document["masses"]) == pytest.approx(1.0, rel=1e-12)
        assert document["provenance"]["kind"] == "segment"

    def test_invalid_sample_count_is_a_usage_error(self, tmp_path, run_cli):
        code, _ = run_cli("gen", "--kind", "circle", "--n-samples", 0, "-o", tmp_path / "c.json")

        assert code == 2

    def test_unknown_kind_is_a_usage_error(self, run_cli):
        code, _ = run_cli("gen", "--kind", "fractal")

        assert code == 2

    def test_resource_guard(self, tmp_path, run_cli, monkeypatch):
        monkeypatch.setattr(app_settings, "max_points", 10)

        code, _ = run_cli("gen", "--kind", "cantor4", "--generation", 3, "-o", tmp_path / "c.json")

        assert code == 3
        assert not (tmp_path / "c.json").exists()


class TestPermCheck:
    def test_unit_alpha_has_no_sign_violations(self, tmp_path, run_cli):
        path = tmp_path / "perm.json"

        code, out = run_cli(
            "perm-check", "--alpha", 1, "--n", 1, "--samples", 2000, "--seed", 3, "-o", path
        )

        report = read_json(path)["report"]
        assert code == 0
        assert out.strip().endswith("sign_violations=0")
        assert report["samples"] == 2000
        assert report["sign_violations"] == 0

    def test_csv_is_rejected(self, run_cli):
        code, _ = run_cli("perm-check", "--alpha", 1, "--n", 1, "--format", "csv")

        assert code == 2


class TestEnergy:
    def test_collinear_triple(self, tmp_path, run_cli):
        measure = write_measure(
            tmp_path / "line.json", [[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]], [1.0, 1.0, 1.0]
        )

        code, _ = run_cli(
            "energy", "--measure", measure, "--triple", "--curvature", "-o", tmp_path / "e.json"
        )

        energies = read_json(tmp_path / "e.json")["energies"]
        assert code == 0
        assert abs(energies["triple_perm_energy"]) < 1e-12
        assert abs(energies["curvature_energy"]) < 1e-12

    def test_two_atom_wolff_energy(self, tmp_path, run_cli):
        measure = write_measure(tmp_path / "two.json", [[0.0, 0.0], [1.0, 0.0]], [0.5, 0.5])

        code, out = run_cli(
            "energy",
            "--measure",
            measure,
            "--wolff-s",
            1,
            "--wolff-p",
            1.5,
            "-o",
            tmp_path / "e.json",
        )

        energies = read_json(tmp_path / "e.json")["energies"]
        assert code == 0
        assert energies["wolff_energy"] == pytest.approx(0.25)
        assert "wolff_energy" in out

    def test_empty_measure(self, tmp_path, run_cli):
        measure = tmp_path / "empty.json"
        measure.write_bytes(orjson.dumps({"d": 2, "atoms": [], "masses": []}))

        code, _ = run_cli("energy", "--measure", measure, "-o", tmp_path / "e.json")

        assert code == 4

    def test_invalid_measure_file(self, tmp_path, run_cli):
        measure = tmp_path / "bad.json"
        measure.write_text("{")

        code, _ = run_cli("energy", "--measure", measure)

        assert code == 4

    def test_wolff_flags_go_together(self, tmp_path, run_cli):
        measure = write_measure(tmp_path / "two.json", [[0.0, 0.0], [1.0, 0.0]], [0.5, 0.5])

        code, _ = run_cli("energy", "--measure", measure, "--wolff-s", 1)

        assert code == 2


class TestCapacity:
    def test_lp_estimate(self, tmp_path, run_cli, segment_file):
        path = tmp_path / "lp.json"

        code, out = run_cli(
            "capacity",
            "--set",
            segment_file,
            "--method",
            "lp",
            "--grid-resolution",
            8,
            "-o",
            path,
        )

        estimate = read_json(path)["estimate"]
        assert code == 0
        assert estimate["method"] == "lp"
        assert 0.0 < estimate["value"] < math.inf
        assert len(estimate["masses"]) == 8
        assert out.split()[1:2] == ["lp"]

    def test_wolff_exponents_out_of_range(self, run_cli, segment_file):
        code, _ = run_cli(
            "capacity",
            "--set",
            segment_file,
            "--method",
            "wolff",
            "--wolff-s",
            1.5,
            "--wolff-p",
            1.5,
        )

        assert code == 2

    @pytest.mark.parametrize("method", ["wolff", "energy"])
    def test_repeated_runs_are_byte_identical(self, tmp_path, run_cli, segment_file, method):
        # Arrange
        path = tmp_path / f"{method}.json"
        argv = ("capacity", "--set", segment_file, "--method", method, "--steps", 40)

        # Act
        first_code, _ = run_cli(*argv, "--seed", 5, "-o", path)
        first = path.read_bytes()
        second_code, _ = run_cli(*argv, "--seed", 5, "-o", path)

        # Assert
        assert first_code == second_code
        assert path.read_bytes() == first

    def test_missing_set_file(self, tmp_path, run_cli):
        code, _ = run_cli("capacity", "--set", tmp_path / "absent.json", "--method", "lp")

        assert code == 4


class TestCompare:
    def test_table_and_exit_code_agree(self, tmp_path, run_cli, segment_file):
        # Arrange
        output = tmp_path / "compare"

        # Act
        code, _ = run_cli(
            "compare",
            "--sets",
            segment_file,
            "--alphas",
            0.5,
            "--ns",
            1,
            2,
            "--grid-resolution",
            8,
            "--steps",
            40,
            "-o",
            output,
        )

        # Assert
        with output.with_suffix(".csv").open(encoding="utf-8", newline="") as handle:
            table = list(csv.reader(handle))
        rows = read_json(output.with_suffix(".json"))["rows"]
        assert table[0] == list(TABLE_COLUMNS)
        assert len(table) == 3
        assert [row["n"] for row in rows] == [1, 2]
        assert all(row["set"] == "segment-n8" for row in rows)
        assert code == (0 if all(row["status"] == "ok" for row in rows) else 6)

    def test_alpha_outside_the_open_interval(self, tmp_path, run_cli, segment_file):
        code, _ = run_cli(
            "compare", "--sets", segment_file, "--alphas", 1.0, "--ns", 1, "-o", tmp_path / "c"
        )

        assert code == 2


class TestRectify:
    def test_segment_and_cantor_profiles(self, tmp_path, run_cli, segment_file):
        # Arrange
        cantor = tmp_path / "cantor.json"
        run_cli("gen", "--kind", "cantor4", "--generation", 2, "-o", cantor)
        output = tmp_path / "rectify"

        # Act
        code, _ = run_cli(
            "rectify", "--sets", segment_file, cantor, "--format", "csv", "-o", output
        )

        # Assert
        rows = read_json(output.with_suffix(".json"))["rows"]
        assert code == 0
        assert output.with_suffix(".csv").exists()
        assert [row["set"] for row in rows] == ["segment-n8", "cantor4-g2-r0.25"]
        assert abs(rows[0]["normalized_triple_energy"]) < 1e-12
        assert rows[1]["normalized_triple_energy"] > 0.0
