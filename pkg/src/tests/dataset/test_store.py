"""
Test cases for the dataset container and its CSV storage
"""

import numpy as np
import pytest

from owc_alloc.dataset.store import Dataset, DatasetLayout, read_dataset, split_dataset, write_dataset
from owc_alloc.utils.errors import InvalidParameterError, ParseError


def synthetic_dataset(n: int = 20, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    layout = DatasetLayout(K=2, L=1)
    features = rng.uniform(0, 3, size=(n, layout.n_features))
    features[:, 4] = 1.0  # constant column
    labels = rng.uniform(0, 1, size=(n, layout.n_labels))
    return Dataset.from_samples(layout, features, labels, np.arange(n) + 100)


@pytest.fixture
def dataset():
    return synthetic_dataset()


@pytest.fixture
def stored(dataset, tmp_path):
    return write_dataset(dataset, tmp_path / "data" / "dataset.csv")


class TestLayout:
    def test_names(self):
        layout = DatasetLayout(K=2, L=3)
        assert layout.n_features == 6 + 3 + 6
        assert layout.feature_names[:2] == ["e_min_0", "e_min_1"]
        assert layout.label_names[-1] == "e_1_2"
        assert DatasetLayout.from_header(layout.header()) == layout

    def test_header_without_users(self):
        with pytest.raises(ValueError):
            DatasetLayout.from_header(["kind", "seed"])


class TestNormalization:
    """Min-max scaling with the dataset constants"""

    def test_unit_range(self, dataset):
        x = dataset.normalized_features
        assert x.min() >= 0.0 and x.max() <= 1.0
        np.testing.assert_array_equal(x[:, 4], np.zeros(dataset.size))

    def test_inverse(self, dataset):
        restored = dataset.denormalize_labels(dataset.normalized_labels)
        np.testing.assert_allclose(restored, dataset.labels, atol=1e-12)

    def test_width_mismatch(self, dataset):
        with pytest.raises(InvalidParameterError):
            Dataset.from_samples(dataset.layout, dataset.features[:, :3], dataset.labels, dataset.seeds)


class TestSplit:
    def test_sizes(self):
        train, val = split_dataset(synthetic_dataset(10_000), 0.9, seed=1)
        assert (train.size, val.size) == (9000, 1000)
        assert not set(train.seeds.tolist()) & set(val.seeds.tolist())

    def test_keeps_normalization(self, dataset):
        train, _ = split_dataset(dataset, 0.5)
        np.testing.assert_array_equal(train.feature_max, dataset.feature_max)

    def test_deterministic(self, dataset):
        first, _ = split_dataset(dataset, 0.7, seed=3)
        second, _ = split_dataset(dataset, 0.7, seed=3)
        np.testing.assert_array_equal(first.seeds, second.seeds)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, 0.01])
    def test_empty_side(self, dataset, fraction):
        with pytest.raises(InvalidParameterError):
            split_dataset(dataset, fraction)

    def test_head(self, dataset):
        head = dataset.head(5)
        np.testing.assert_array_equal(head.seeds, dataset.seeds[:5])
        with pytest.raises(InvalidParameterError):
            dataset.head(dataset.size + 1)


class TestCsv:
    """Dataset CSV files"""

    def test_values_survive_exactly(self, dataset, stored):
        loaded = read_dataset(stored)
        np.testing.assert_array_equal(loaded.features, dataset.features)
        np.testing.assert_array_equal(loaded.labels, dataset.labels)
        np.testing.assert_array_equal(loaded.seeds, dataset.seeds)
        np.testing.assert_array_equal(loaded.label_min, dataset.label_min)

    def test_layout_of_file(self, stored):
        lines = stored.read_text().splitlines()
        assert lines[0].startswith("kind,seed,e_min_0,e_min_1")
        assert lines[1].startswith("min,,") and lines[2].startswith("max,,")
        assert lines[3].startswith("sample,100,")

    def corrupt(self, path, line: int, replacement: str):
        lines = path.read_text().splitlines()
        lines[line - 1] = replacement
        path.write_text("\n".join(lines) + "\n")

    def test_non_numeric_value(self, stored):
        row = stored.read_text().splitlines()[4].split(",")
        row[3] = "abc"
        self.corrupt(stored, 5, ",".join(row))
        with pytest.raises(ParseError) as info:
            read_dataset(stored)
        assert info.value.line == 5

    def test_wrong_field_count(self, stored):
        self.corrupt(stored, 4, "sample,1,2")
        with pytest.raises(ParseError) as info:
            read_dataset(stored)
        assert info.value.line == 4

    def test_unknown_kind(self, stored):
        row = stored.read_text().splitlines()[3].split(",")
        row[0] = "extra"
        self.corrupt(stored, 4, ",".join(row))
        with pytest.raises(ParseError, match="unknown row kind"):
            read_dataset(stored)

    def test_header_mismatch(self, stored):
        self.corrupt(stored, 1, "kind,seed,a,b")
        with pytest.raises(ParseError) as info:
            read_dataset(stored)
        assert info.value.line == 1

    def test_missing_constants(self, stored):
        lines = stored.read_text().splitlines()
        stored.write_text("\n".join([lines[0]] + lines[3:]) + "\n")
        with pytest.raises(ParseError, match="normalization"):
            read_dataset(stored)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError) as info:
            read_dataset(path)
        assert info.value.line == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_dataset(tmp_path / "absent.csv")
