import math

import numpy as np
import orjson
import pytest

from capflow.core.measures.repository import MeasureRepository
from capflow.core.sets.repository import CloudRepository
from capflow.core.sets.schema import WeightConvention
from capflow.core.sets.service import cantor4, sample_curve
from capflow.utils.base.repository import jsonable
from capflow.utils.cli_utils.exception import InputValidationException


class TestMeasureRepository:
    def test_save_and_get(self, tmp_path, random_measure):
        # Arrange
        mu = random_measure(9, 3)
        path = tmp_path / "nested" / "mu.json"

        # Act
        MeasureRepository().save_object(mu, path)
        loaded = MeasureRepository().get(path)

        # Assert
        assert loaded.d == 3
        np.testing.assert_array_equal(loaded.atoms, mu.atoms)
        np.testing.assert_array_equal(loaded.masses, mu.masses)

    def test_metadata_is_stored_beside_the_value(self, tmp_path, two_atoms):
        path = MeasureRepository().save_object(two_atoms, tmp_path / "mu.json", seed=4)

        document = orjson.loads(path.read_bytes())

        assert document["metadata"] == {"seed": 4}
        assert document["masses"] == [0.5, 0.5]

    def test_empty_measure_with_dimension(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_bytes(orjson.dumps({"d": 2, "atoms": [], "masses": []}))

        assert MeasureRepository().get(path).size == 0

    @pytest.mark.parametrize(
        "content",
        [
            b"not json",
            b"[1, 2]",
            b'{"atoms": [[0, 0]]}',
            b'{"atoms": [[0, 0], [0, 0]], "masses": [1, 1]}',
            b'{"atoms": [[0, 0]], "masses": [-1]}',
            b'{"atoms": [], "masses": []}',
        ],
        ids=["garbage", "array", "no-masses", "duplicates", "negative", "no-dimension"],
    )
    def test_invalid_documents(self, tmp_path, content):
        path = tmp_path / "bad.json"
        path.write_bytes(content)

        with pytest.raises(InputValidationException):
            MeasureRepository().get(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputValidationException):
            MeasureRepository().get(tmp_path / "absent.json")


class TestCloudRepository:
    def test_save_and_get_keeps_provenance(self, tmp_path):
        cloud = sample_curve("circle", 12, radius=2.0)

        path = CloudRepository().save_object(cloud, tmp_path / "circle.json")
        loaded = CloudRepository().get(path)

        assert loaded.provenance == cloud.provenance
        assert loaded.convention is WeightConvention.length
        assert loaded.label == cloud.label
        np.testing.assert_array_equal(loaded.points, cloud.points)

    def test_plain_measure_file_is_a_uniform_custom_cloud(self, tmp_path, two_atoms):
        path = MeasureRepository().save_object(two_atoms, tmp_path / "mu.json")

        cloud = CloudRepository().get(path)

        assert cloud.convention is WeightConvention.uniform
        assert cloud.provenance is None
        assert cloud.label == "custom"

    def test_measure_repository_reads_cloud_files(self, tmp_path):
        cloud = cantor4(2)
        path = CloudRepository().save_object(cloud, tmp_path / "cantor.json")

        mu = MeasureRepository().get(path)

        np.testing.assert_array_equal(mu.masses, cloud.weights)

    def test_unknown_convention(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_bytes(orjson.dumps({"atoms": [[0, 0]], "masses": [1], "weights": "mass"}))

        with pytest.raises(InputValidationException):
            CloudRepository().get(path)


class TestJsonable:
    def test_non_finite_floats_become_strings(self):
        assert jsonable({"a": math.inf, "b": [-math.inf, math.nan]}) == {
            "a": "inf",
            "b": ["-inf", "nan"],
        }

    def test_numpy_values(self):
        assert jsonable({"x": np.array([1.0, np.inf]), "n": np.int64(3)}) == {
            "x": [1.0, "inf"],
            "n": 3,
        }
