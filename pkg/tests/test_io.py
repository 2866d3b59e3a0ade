import gzip
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import heuristic_specs, random_instance
from gradlearn.archive import load_model, model_from_dict, model_to_dict, save_model
from gradlearn.classification import fit_gradient_classification, predict_logodds
from gradlearn.data import Dataset
from gradlearn.errors import DataFormatError
from gradlearn.io import (
    load_csv,
    load_idx_dataset,
    load_idx_images,
    load_idx_labels,
    read_matrix,
    write_dataset,
    write_idx_images,
    write_idx_labels,
    write_matrix,
)
from gradlearn.regression import fit_gradient_regression, predict_gradient


class TestCsv:
    def test_small_table(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,-1\n3,4,1\n")
        data = load_csv(path)
        assert (data.n, data.p) == (2, 2)
        np.testing.assert_array_equal(data.y, [-1, 1])

    def test_header_skipped(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,label,b\n1,5,2\n3,6,4\n")
        data = load_csv(path, "label", header=True)
        np.testing.assert_array_equal(data.X, [[1, 2], [3, 4]])
        np.testing.assert_array_equal(data.y, [5, 6])

    @given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=6),
                      elements=st.floats(allow_nan=False, allow_infinity=False)))
    def test_round_trip_bit_identical(self, tmp_path_factory, M):
        path = tmp_path_factory.mktemp("rt") / "m.csv"
        write_matrix(path, M)
        back, _ = read_matrix(path)
        if M.shape[1] == 0:
            assert back.size == 0
        else:
            assert np.array_equal(back, M) and np.array_equal(np.signbit(back), np.signbit(M))

    def test_dataset_round_trip(self, tmp_path, rng):
        data = Dataset(rng.normal(size=(7, 3)), rng.normal(size=7))
        write_dataset(tmp_path / "d.csv", data)
        back = load_csv(tmp_path / "d.csv", header=True)
        assert back.digest() == data.digest()

    def test_ragged(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,3\n4,5\n")
        with pytest.raises(DataFormatError, match="row 2"):
            load_csv(path)

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,3\n4,x,6\n")
        with pytest.raises(DataFormatError, match="row 2, column 2"):
            load_csv(path)

    @pytest.mark.parametrize("col", [5, "missing"])
    def test_missing_label_column(self, tmp_path, col):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DataFormatError):
            load_csv(path, col, header=True)

    def test_classification_label_check(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,1\n2,0\n")
        with pytest.raises(DataFormatError, match="labels"):
            load_csv(path, classification=True)
        assert load_csv(path).n == 2


def _idx_fixture(tmp_path):
    images = np.array([[[0, 1], [2, 255]], [[10, 20], [30, 40]]], dtype=np.uint8)
    write_idx_images(tmp_path / "img", images)
    write_idx_labels(tmp_path / "lab", [3, 8])
    return images


class TestIdx:
    def test_two_image_fixture(self, tmp_path):
        images = _idx_fixture(tmp_path)
        X = load_idx_images(tmp_path / "img")
        assert X.shape == (2, 4)
        np.testing.assert_array_equal(X, images.reshape(2, 4) / 255.0)
        assert X[0, 3] == 1.0 and X[0, 0] == 0.0

    def test_header_layout_is_big_endian(self, tmp_path):
        _idx_fixture(tmp_path)
        raw = (tmp_path / "img").read_bytes()
        assert raw[:16] == bytes.fromhex("00000803" "00000002" "00000002" "00000002")
        assert raw[16:20] == bytes([0, 1, 2, 255])

    def test_gzip(self, tmp_path):
        images = _idx_fixture(tmp_path)
        (tmp_path / "img.gz").write_bytes(gzip.compress((tmp_path / "img").read_bytes()))
        np.testing.assert_array_equal(load_idx_images(tmp_path / "img.gz") * 255, images.reshape(2, 4))

    def test_wrong_magic(self, tmp_path):
        _idx_fixture(tmp_path)
        with pytest.raises(DataFormatError, match="magic"):
            load_idx_images(tmp_path / "lab")

    def test_truncated(self, tmp_path):
        _idx_fixture(tmp_path)
        raw = (tmp_path / "img").read_bytes()
        (tmp_path / "short").write_bytes(raw[:-1])
        with pytest.raises(DataFormatError, match="truncated"):
            load_idx_images(tmp_path / "short")
        (tmp_path / "stub").write_bytes(raw[:6])
        with pytest.raises(DataFormatError, match="truncated"):
            load_idx_images(tmp_path / "stub")

    def test_count_mismatch(self, tmp_path):
        _idx_fixture(tmp_path)
        write_idx_labels(tmp_path / "lab3", [3, 8, 8])
        with pytest.raises(DataFormatError):
            load_idx_dataset(tmp_path / "img", tmp_path / "lab3")

    def test_pair_filter(self, tmp_path):
        images = np.arange(3 * 4, dtype=np.uint8).reshape(3, 2, 2)
        write_idx_images(tmp_path / "img", images)
        write_idx_labels(tmp_path / "lab", [8, 1, 3])
        data = load_idx_dataset(tmp_path / "img", tmp_path / "lab", pair=(3, 8))
        np.testing.assert_array_equal(data.y, [1, -1])
        np.testing.assert_array_equal(data.X * 255, images[[0, 2]].reshape(2, 4))
        np.testing.assert_array_equal(load_idx_labels(tmp_path / "lab"), [8, 1, 3])

    def test_labels_raw(self, tmp_path):
        (tmp_path / "lab").write_bytes(struct.pack(">II", 0x801, 2) + bytes([7, 9]))
        np.testing.assert_array_equal(load_idx_labels(tmp_path / "lab"), [7, 9])


class TestArchive:
    def test_regression_round_trip(self, tmp_path, rng):
        data = random_instance(rng, 12, 4)
        X = data.X
        k, w = heuristic_specs(X)
        model = fit_gradient_regression(data, k, w, 1e-3)
        save_model(tmp_path / "m.json", model, {"seed": 1})
        back = load_model(tmp_path / "m.json")
        Q = rng.normal(size=(100, 4))
        np.testing.assert_array_equal(predict_gradient(back, Q), predict_gradient(model, Q))
        assert back.lam == model.lam and back.objective_value == model.objective_value

    def test_classification_round_trip(self, tmp_path, rng):
        data = random_instance(rng, 14, 3, response="labels")
        X = data.X
        k, w = heuristic_specs(X)
        model = fit_gradient_classification(data, k, w, 1e-3, 1e-3)
        save_model(tmp_path / "m.json", model)
        back = load_model(tmp_path / "m.json")
        Q = rng.normal(size=(100, 3))
        np.testing.assert_array_equal(predict_logodds(back, Q), predict_logodds(model, Q))
        np.testing.assert_array_equal(back.grad_coefficients, model.grad_coefficients)

    def test_provenance_kept(self, rng):
        data = random_instance(rng, 6, 2)
        X = data.X
        k, w = heuristic_specs(X)
        doc = model_to_dict(fit_gradient_regression(data, k, w, 1e-3), {"seed": 9})
        assert doc["provenance"] == {"seed": 9} and doc["kind"] == "regression"

    def test_malformed(self, tmp_path):
        with pytest.raises(DataFormatError):
            model_from_dict({"schema_version": 1})
        with pytest.raises(DataFormatError):
            model_from_dict({"schema_version": 99})
        (tmp_path / "bad.json").write_text("{not json")
        with pytest.raises(DataFormatError):
            load_model(tmp_path / "bad.json")
