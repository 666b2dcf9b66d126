import numpy as np
import numpy.testing as npt
import pytest

from covscatter.errors import InvalidData
from covscatter.io import (
    feature_column_names,
    read_data_csv,
    read_keyvalue,
    read_targets_csv,
    write_data_csv,
    write_features_csv,
    write_provenance,
    write_targets_csv,
)
from covscatter.scattering import CstConfig, cst_fit, cst_transform_batch
from covscatter.spectral import DataMatrix, sample_covariance
from covscatter.wavelets import Diffusion


class TestDataRoundTrip:
    def test_bit_identical(self, tmp_path, rng):
        data = DataMatrix(rng.standard_normal((5, 11)), feature_names=[f"r{i}" for i in range(5)])
        path = tmp_path / "data.csv"
        write_data_csv(path, data)
        back = read_data_csv(path)
        npt.assert_array_equal(back.values, data.values)
        assert back.feature_names == data.feature_names

    def test_targets_round_trip(self, tmp_path, rng):
        y = rng.standard_normal(9)
        path = tmp_path / "targets.csv"
        write_targets_csv(path, y)
        npt.assert_array_equal(read_targets_csv(path), y)

    def test_non_numeric_cell_diagnostics(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,2.0\n3.0,oops\n")
        with pytest.raises(InvalidData) as err:
            read_data_csv(path)
        message = str(err.value)
        assert "row 3" in message and "column 2" in message and "'oops'" in message

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,2.0\n3.0\n")
        with pytest.raises(InvalidData):
            read_data_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(InvalidData):
            read_data_csv(path)


class TestKeyValue:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "prov.txt"
        write_provenance(path, {"family": "hann", "J": 4, "gamma": 10.0, "warp": True})
        parsed = read_keyvalue(path)
        assert parsed == {"family": "hann", "J": "4", "gamma": "10.0", "warp": "true"}

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "conf.txt"
        path.write_text("# comment\n\nj = 4\n tau = 0.1 \n")
        assert read_keyvalue(path) == {"j": "4", "tau": "0.1"}

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "conf.txt"
        path.write_text("just words\n")
        with pytest.raises(InvalidData):
            read_keyvalue(path)


class TestFeaturesCsv:
    def test_header_and_values(self, tmp_path, rng):
        data = DataMatrix(rng.standard_normal((4, 6)))
        model = cst_fit(sample_covariance(data), CstConfig(family=Diffusion(), J=2, L=2))
        batch = cst_transform_batch(model, data)
        path = tmp_path / "features.csv"
        write_features_csv(path, batch)
        lines = path.read_text().strip().splitlines()
        assert lines[0].split(",")[0] == "p_root[0]"
        assert len(lines) == 1 + 6
        first_row = np.array([float(v) for v in lines[1].split(",")])
        npt.assert_array_equal(first_row, batch.matrix[0])

    def test_mean_aggregation_names(self):
        names = feature_column_names([(), (0,), (1, 2)], width=1)
        assert names == ["p_root", "p_0", "p_1.2"]
