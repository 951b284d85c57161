"""
Dataset container, min-max normalization, splitting and CSV storage

CSV layout: header "kind,seed,<features>,<labels>", then a "min" row and a
"max" row with the normalization constants, then one "sample" row per
scenario. Values are raw (not normalized) and written with repr.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..utils.errors import InvalidParameterError, ParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class DatasetLayout:
    """Feature order [e_min, e_max, xi, rho, vec(r)] and label order vec(e)"""

    K: int
    L: int

    @property
    def feature_names(self) -> List[str]:
        names = [f"e_min_{k}" for k in range(self.K)]
        names += [f"e_max_{k}" for k in range(self.K)]
        names += [f"xi_{k}" for k in range(self.K)]
        names += [f"rho_{l}" for l in range(self.L)]
        names += [f"r_{k}_{l}" for k in range(self.K) for l in range(self.L)]
        return names

    @property
    def label_names(self) -> List[str]:
        return [f"e_{k}_{l}" for k in range(self.K) for l in range(self.L)]

    @property
    def n_features(self) -> int:
        return 3 * self.K + self.L + self.K * self.L

    @property
    def n_labels(self) -> int:
        return self.K * self.L

    def header(self) -> List[str]:
        return ["kind", "seed"] + self.feature_names + self.label_names

    @classmethod
    def from_header(cls, header: List[str]) -> "DatasetLayout":
        K = sum(1 for name in header if name.startswith("e_min_"))
        L = sum(1 for name in header if name.startswith("rho_"))
        if K < 1 or L < 1:
            raise ValueError("header names no users or no APs")
        return cls(K=K, L=L)


def _span(low: np.ndarray, high: np.ndarray) -> np.ndarray:
    span = high - low
    return np.where(span > 0, span, 1.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Raw features and labels with the min-max constants of the full dataset"""

    layout: DatasetLayout
    features: np.ndarray
    labels: np.ndarray
    seeds: np.ndarray
    feature_min: np.ndarray
    feature_max: np.ndarray
    label_min: np.ndarray
    label_max: np.ndarray
    dropped: int = 0

    def __post_init__(self):
        if len(self.features) < 1:
            raise InvalidParameterError("a dataset needs at least one sample")
        if self.features.shape[1] != self.layout.n_features or self.labels.shape[1] != self.layout.n_labels:
            raise InvalidParameterError("feature or label width does not match the layout")
        if not (len(self.features) == len(self.labels) == len(self.seeds)):
            raise InvalidParameterError("features, labels and seeds differ in length")

    @classmethod
    def from_samples(
        cls,
        layout: DatasetLayout,
        features: np.ndarray,
        labels: np.ndarray,
        seeds: np.ndarray,
        dropped: int = 0,
    ) -> "Dataset":
        features = np.asarray(features, dtype=float)
        labels = np.asarray(labels, dtype=float)
        return cls(
            layout=layout,
            features=features,
            labels=labels,
            seeds=np.asarray(seeds, dtype=np.int64),
            feature_min=features.min(axis=0),
            feature_max=features.max(axis=0),
            label_min=labels.min(axis=0),
            label_max=labels.max(axis=0),
            dropped=dropped,
        )

    @property
    def size(self) -> int:
        return len(self.features)

    def normalize_features(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.feature_min) / _span(self.feature_min, self.feature_max)

    def denormalize_features(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) * _span(self.feature_min, self.feature_max) + self.feature_min

    def normalize_labels(self, y: np.ndarray) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.label_min) / _span(self.label_min, self.label_max)

    def denormalize_labels(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float) * _span(self.label_min, self.label_max) + self.label_min

    @property
    def normalized_features(self) -> np.ndarray:
        return self.normalize_features(self.features)

    @property
    def normalized_labels(self) -> np.ndarray:
        return self.normalize_labels(self.labels)

    def subset(self, indices: np.ndarray) -> "Dataset":
        """Samples at the given indices, keeping this dataset's normalization"""
        indices = np.asarray(indices, dtype=int)
        return Dataset(
            layout=self.layout,
            features=self.features[indices],
            labels=self.labels[indices],
            seeds=self.seeds[indices],
            feature_min=self.feature_min,
            feature_max=self.feature_max,
            label_min=self.label_min,
            label_max=self.label_max,
        )

    def head(self, n: int) -> "Dataset":
        """First n samples, keeping this dataset's normalization"""
        if not 1 <= n <= self.size:
            raise InvalidParameterError(f"cannot take {n} of {self.size} samples")
        return self.subset(np.arange(n))


def split_dataset(dataset: Dataset, train_fraction: float, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """Shuffled train/validation partition; round(N * fraction) training samples"""
    if not 0 < train_fraction < 1:
        raise InvalidParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = int(round(dataset.size * train_fraction))
    if not 0 < n_train < dataset.size:
        raise InvalidParameterError(
            f"a {train_fraction} split of {dataset.size} samples leaves one side empty"
        )
    order = np.random.default_rng(seed).permutation(dataset.size)
    return dataset.subset(order[:n_train]), dataset.subset(order[n_train:])


def _values(row: np.ndarray) -> List[str]:
    return [repr(float(v)) for v in row]


def write_dataset(dataset: Dataset, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(dataset.layout.header())
        writer.writerow(["min", ""] + _values(dataset.feature_min) + _values(dataset.label_min))
        writer.writerow(["max", ""] + _values(dataset.feature_max) + _values(dataset.label_max))
        for x, y, seed in zip(dataset.features, dataset.labels, dataset.seeds):
            writer.writerow(["sample", int(seed)] + _values(x) + _values(y))
    logger.info(f"Dataset with {dataset.size} samples written to {path}")
    return path


def read_dataset(path: PathLike) -> Dataset:
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot open dataset: {e}", path=str(path)) from e

    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise ParseError("empty dataset file", path=str(path), line=1)
        try:
            layout = DatasetLayout.from_header(header)
        except ValueError as e:
            raise ParseError(f"header mismatch: {e}", path=str(path), line=1) from e
        if header != layout.header():
            raise ParseError("header mismatch", path=str(path), line=1)

        width = len(header)
        n_features = layout.n_features
        constants = {}
        features, labels, seeds = [], [], []
        for line, row in enumerate(reader, start=2):
            if len(row) != width:
                raise ParseError(f"row has {len(row)} fields, expected {width}", path=str(path), line=line)
            kind = row[0]
            try:
                values = np.array([float(v) for v in row[2:]])
            except ValueError as e:
                raise ParseError(f"non-numeric value: {e}", path=str(path), line=line) from e
            if kind in ("min", "max"):
                constants[kind] = values
            elif kind == "sample":
                try:
                    seeds.append(int(row[1]))
                except ValueError as e:
                    raise ParseError(f"invalid seed '{row[1]}'", path=str(path), line=line) from e
                features.append(values[:n_features])
                labels.append(values[n_features:])
            else:
                raise ParseError(f"unknown row kind '{kind}'", path=str(path), line=line)

    if set(constants) != {"min", "max"}:
        raise ParseError("normalization rows missing", path=str(path))
    if not features:
        raise ParseError("dataset has no samples", path=str(path))

    return Dataset(
        layout=layout,
        features=np.vstack(features),
        labels=np.vstack(labels),
        seeds=np.array(seeds, dtype=np.int64),
        feature_min=constants["min"][:n_features],
        feature_max=constants["max"][:n_features],
        label_min=constants["min"][n_features:],
        label_max=constants["max"][n_features:],
    )
