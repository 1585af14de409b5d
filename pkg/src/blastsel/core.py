"""Dataset representation, CSV ingestion, stratified splitting and mask application.

The feature CSV format is: UTF-8, comma separated, header ``id,label,f0..f{d-1}``,
one row per sample. Labels may be ``ALL``/``1`` (positive) or ``HEM``/``0``
(negative). Floats are written with full round-trip precision so that
save -> load is bit-exact. A ``.gz`` extension selects gzip compression.
"""

from __future__ import annotations

import csv
import gzip
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DatasetFormatError,
    EmptyMaskError,
    InvalidSplitError,
    NonFiniteFeatureError,
)

_LABEL_TOKENS = {"ALL": 1, "1": 1, "HEM": 0, "0": 0}


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix plus binary labels (1 = positive class)."""

    features: np.ndarray  # (n_samples, n_features) float64
    labels: np.ndarray    # (n_samples,) int64 in {0, 1}
    ids: tuple[str, ...]

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        ids = tuple(str(i) for i in self.ids)
        if features.ndim != 2:
            raise DatasetFormatError("features must be a 2-D matrix")
        if labels.ndim != 1 or len(labels) != features.shape[0] or len(ids) != features.shape[0]:
            raise DatasetFormatError("features, labels and ids disagree on sample count")
        if not np.all(np.isfinite(features)):
            raise NonFiniteFeatureError("features contain non-finite values")
        if not np.all((labels == 0) | (labels == 1)):
            raise DatasetFormatError("labels must be 0 or 1")
        if len(set(ids)) != len(ids):
            raise DatasetFormatError("sample ids are not unique")
        features = features.copy()
        features.setflags(write=False)
        labels = labels.copy()
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        """Row subset in the given index order."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[indices],
            self.labels[indices],
            tuple(self.ids[i] for i in indices),
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.ids == other.ids
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.features, other.features)
        )


@dataclass(frozen=True)
class FeatureMask:
    """Boolean inclusion vector over feature columns."""

    bits: np.ndarray  # (n_features,) bool

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool).copy()
        if bits.ndim != 1:
            raise ValueError("mask bits must be a 1-D vector")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def n_features(self) -> int:
        return self.bits.shape[0]

    @property
    def n_selected(self) -> int:
        return int(self.bits.sum())

    def indices(self) -> list[int]:
        return [int(i) for i in np.nonzero(self.bits)[0]]

    @classmethod
    def from_indices(cls, indices, n_features: int) -> "FeatureMask":
        bits = np.zeros(n_features, dtype=bool)
        bits[list(indices)] = True
        return cls(bits)

    @classmethod
    def all_true(cls, n_features: int) -> "FeatureMask":
        return cls(np.ones(n_features, dtype=bool))

    def __eq__(self, other):
        if not isinstance(other, FeatureMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class SplitSpec:
    """Test fraction and shuffle seed for a stratified split."""

    t_percent: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.t_percent < 1.0):
            raise InvalidSplitError(f"t_percent must be in (0,1), got {self.t_percent}")


def _open_text(path: str, mode: str):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def load_dataset(path, format: str = "csv") -> Dataset:
    """Load a feature CSV into a Dataset, mapping ALL -> 1 and HEM -> 0."""
    if format != "csv":
        raise ValueError(f"unsupported format: {format}")
    ids: list[str] = []
    labels: list[int] = []
    rows: list[list[float]] = []
    with _open_text(path, "r") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3 or header[0] != "id" or header[1] != "label":
            raise DatasetFormatError(f"{path}: expected header 'id,label,f0,...'")
        width = len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DatasetFormatError(f"{path}:{lineno}: ragged row ({len(row)} of {width} columns)")
            sample_id = row[0]
            if not sample_id:
                raise DatasetFormatError(f"{path}:{lineno}: missing sample id")
            token = row[1]
            if token not in _LABEL_TOKENS:
                raise DatasetFormatError(f"{path}:{lineno}: unknown label token {token!r}")
            values = []
            for col, tok in enumerate(row[2:], start=2):
                try:
                    v = float(tok)
                except ValueError:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: non-numeric feature value {tok!r} in column {col}"
                    ) from None
                if not math.isfinite(v):
                    raise NonFiniteFeatureError(f"{path}:{lineno}: non-finite feature value {tok!r}")
                values.append(v)
            ids.append(sample_id)
            labels.append(_LABEL_TOKENS[token])
            rows.append(values)
    if len(set(ids)) != len(ids):
        seen, dup = set(), None
        for i in ids:
            if i in seen:
                dup = i
                break
            seen.add(i)
        raise DatasetFormatError(f"{path}: duplicate sample id {dup!r}")
    features = np.asarray(rows, dtype=np.float64).reshape(len(rows), width - 2)
    return Dataset(features, np.asarray(labels, dtype=np.int64), tuple(ids))


def save_dataset(ds: Dataset, path) -> None:
    """Write the CSV form of a Dataset; floats keep full round-trip precision."""
    with _open_text(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label"] + [f"f{i}" for i in range(ds.n_features)])
        for i in range(ds.n_samples):
            writer.writerow(
                [ds.ids[i], int(ds.labels[i])] + [f"{v:.17g}" for v in ds.features[i]]
            )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Split into (train, test) keeping per-class test counts at round(t * class size).

    If the per-class rounds do not add up to round(t * n), the largest class
    absorbs the +-1 correction. Membership is shuffled by the seed; row order
    within each part follows the original dataset. Rounding is half-up.
    """
    counts = {c: int(np.sum(ds.labels == c)) for c in (0, 1)}
    for c, n_c in counts.items():
        if n_c < 2:
            raise InvalidSplitError(f"class {c} has {n_c} samples; need at least 2")
    total_test = _round_half_up(spec.t_percent * ds.n_samples)
    test_counts = {c: _round_half_up(spec.t_percent * n_c) for c, n_c in counts.items()}
    diff = total_test - sum(test_counts.values())
    if diff != 0:
        largest = max((0, 1), key=lambda c: (counts[c], -c))
        test_counts[largest] = min(max(test_counts[largest] + diff, 0), counts[largest])

    rng = np.random.default_rng(spec.seed)
    test_idx: list[int] = []
    for c in (0, 1):
        class_idx = np.nonzero(ds.labels == c)[0]
        shuffled = class_idx[rng.permutation(len(class_idx))]
        test_idx.extend(int(i) for i in shuffled[: test_counts[c]])
    test_set = set(test_idx)
    train_rows = [i for i in range(ds.n_samples) if i not in test_set]
    test_rows = sorted(test_set)
    return ds.subset(train_rows), ds.subset(test_rows)


def apply_mask(ds: Dataset, mask: FeatureMask) -> Dataset:
    """Keep only the masked feature columns, preserving column order."""
    if mask.n_features != ds.n_features:
        raise ValueError(f"mask length {mask.n_features} != n_features {ds.n_features}")
    if mask.n_selected == 0:
        raise EmptyMaskError("mask selects no features")
    return Dataset(ds.features[:, mask.bits], ds.labels, ds.ids)
