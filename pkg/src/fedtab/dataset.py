"""Tabular data handling: loading, encoding, splitting, client partitioning.

A FeatureSchema declares the column set once; every table is reordered to
schema order at load time, so downstream code never depends on file column
order.  Encoding is strictly leakage-free: z-score statistics come from the
fit rows a caller names (training rows), while categorical vocabularies are
dataset-level schema metadata so that encoded width is identical across all
participants.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ColumnNotFoundError,
    EmptyFitSetError,
    EmptyTableError,
    HeaderMismatchError,
    InvalidConfigError,
    InvalidFractionError,
    NonIntegerGradeError,
    NonNumericCellError,
    RaggedRowError,
    ShapeMismatchError,
    StratificationImpossibleError,
    TooManyClientsError,
    UnknownTargetClassError,
)

KIND_CONTINUOUS = "continuous"
KIND_CATEGORICAL = "categorical"
KIND_TARGET = "target"
_KINDS = (KIND_CONTINUOUS, KIND_CATEGORICAL, KIND_TARGET)


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidConfigError("column name must be non-empty")
        if self.kind not in _KINDS:
            raise InvalidConfigError(f"unknown column kind {self.kind!r} for {self.name!r}")


@dataclass(frozen=True)
class FeatureSchema:
    """Column declarations plus the ordered list of target class values.

    ``vocabularies`` optionally pins the level set of categorical columns.
    When present it fixes the one-hot width globally; when absent the levels
    are scanned from whatever rows statistics are fitted on.
    """

    columns: tuple[ColumnSpec, ...]
    target_classes: tuple[str, ...]
    delimiter: str = ";"
    vocabularies: Mapping[str, tuple[str, ...]] | None = None

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise InvalidConfigError("duplicate column names in schema")
        targets = [c for c in self.columns if c.kind == KIND_TARGET]
        if len(targets) != 1:
            raise InvalidConfigError(f"schema needs exactly one target column, got {len(targets)}")
        if len(self.target_classes) < 2:
            raise InvalidConfigError("need at least two target classes")
        if len(set(self.target_classes)) != len(self.target_classes):
            raise InvalidConfigError("duplicate target class values")
        if len(self.delimiter) != 1:
            raise InvalidConfigError(f"delimiter must be a single character, got {self.delimiter!r}")
        if self.vocabularies is not None:
            categorical = {c.name for c in self.columns if c.kind == KIND_CATEGORICAL}
            for col, levels in self.vocabularies.items():
                if col not in categorical:
                    raise InvalidConfigError(f"vocabulary given for non-categorical column {col!r}")
                if len(set(levels)) != len(levels) or not levels:
                    raise InvalidConfigError(f"vocabulary for {col!r} must be non-empty and unique")

    @property
    def target_column(self) -> str:
        return next(c.name for c in self.columns if c.kind == KIND_TARGET)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def feature_columns(self, kind: str | None = None) -> tuple[ColumnSpec, ...]:
        picked = [c for c in self.columns if c.kind != KIND_TARGET]
        if kind is not None:
            picked = [c for c in picked if c.kind == kind]
        return tuple(picked)

    def with_vocabularies_from(self, raw: "RawTable") -> "FeatureSchema":
        """Pin categorical levels to the sorted distinct values in ``raw``.

        Meant to run once on the full table before any partitioning, so every
        participant encodes to the same width.  The level sets are treated as
        public dataset metadata, like the schema itself.
        """
        vocab = {
            c.name: tuple(sorted(set(raw.column(c.name))))
            for c in self.feature_columns(KIND_CATEGORICAL)
        }
        return FeatureSchema(self.columns, self.target_classes, self.delimiter, vocab)


@dataclass(frozen=True, eq=False)
class RawTable:
    """Parsed but not yet encoded rows, in schema column order."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise EmptyTableError("table has no data rows")
        width = len(self.header)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise RaggedRowError(f"row {i + 1} has {len(row)} cells, header has {width}")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        try:
            return self.header.index(name)
        except ValueError:
            raise ColumnNotFoundError(f"column {name!r} not in table") from None

    def column(self, name: str) -> list[str]:
        j = self.column_index(name)
        return [row[j] for row in self.rows]

    def subset(self, indices: Sequence[int]) -> "RawTable":
        return RawTable(self.header, tuple(self.rows[i] for i in indices))


def _clean_cell(cell: str) -> str:
    cell = cell.strip()
    if len(cell) >= 2 and cell[0] == '"' and cell[-1] == '"':
        cell = cell[1:-1].strip()
    return cell


def load_table(path: str | Path, schema: FeatureSchema) -> RawTable:
    """Read a delimited file and reorder its columns to schema order.

    Header matching ignores column order and surrounding whitespace or
    quotes, but any missing or unexpected column name is a hard error; so is
    a row whose cell count differs from the header's.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle, delimiter=schema.delimiter, quotechar='"')
        try:
            raw_header = next(reader)
        except StopIteration:
            raise EmptyTableError(f"{path}: file is empty") from None
        header = tuple(_clean_cell(c) for c in raw_header)
        if len(set(header)) != len(header):
            dupes = sorted({c for c in header if header.count(c) > 1})
            raise HeaderMismatchError(f"{path}: duplicate header columns {dupes}")
        expected = set(schema.column_names)
        missing = sorted(expected - set(header))
        extra = sorted(set(header) - expected)
        if missing or extra:
            raise HeaderMismatchError(f"{path}: missing columns {missing}, unexpected columns {extra}")
        order = [header.index(name) for name in schema.column_names]

        rows = []
        for parsed in reader:
            if not parsed:
                continue  # tolerate blank lines, e.g. a trailing newline
            if len(parsed) != len(header):
                raise RaggedRowError(
                    f"{path}: line {reader.line_num} has {len(parsed)} cells, expected {len(header)}"
                )
            cleaned = [_clean_cell(c) for c in parsed]
            rows.append(tuple(cleaned[j] for j in order))
    if not rows:
        raise EmptyTableError(f"{path}: no data rows")
    return RawTable(tuple(schema.column_names), tuple(rows))


def binarize_grade_target(
    raw: RawTable, grade_column: str, pass_threshold: int
) -> RawTable:
    """Map an integer grade column to 'pass' / 'fail' at the given threshold.

    A grade passes when it is greater than or equal to the threshold.
    """
    j = raw.column_index(grade_column)
    rows = []
    for i, row in enumerate(raw.rows):
        try:
            grade = int(row[j])
        except ValueError:
            raise NonIntegerGradeError(
                f"row {i + 1}: grade {row[j]!r} is not an integer"
            ) from None
        label = "pass" if grade >= pass_threshold else "fail"
        rows.append(row[:j] + (label,) + row[j + 1 :])
    return RawTable(raw.header, tuple(rows))


@dataclass(frozen=True)
class EncodingStats:
    """Fitted z-score parameters and categorical level sets.

    ``scale`` holds the population standard deviation; columns with zero
    spread keep scale 0 and encode to the constant 0.
    """

    means: Mapping[str, float]
    scales: Mapping[str, float]
    vocabularies: Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        for col, s in self.scales.items():
            if not (math.isfinite(s) and s >= 0.0):
                raise InvalidConfigError(f"scale for {col!r} must be finite and non-negative")
        for col, m in self.means.items():
            if not math.isfinite(m):
                raise InvalidConfigError(f"mean for {col!r} must be finite")
        for col, levels in self.vocabularies.items():
            if len(set(levels)) != len(levels):
                raise InvalidConfigError(f"duplicate levels in vocabulary for {col!r}")


def _parse_continuous(raw: RawTable, name: str, rows: Sequence[int]) -> np.ndarray:
    j = raw.column_index(name)
    out = np.empty(len(rows), dtype=np.float64)
    for k, i in enumerate(rows):
        cell = raw.rows[i][j]
        try:
            value = float(cell)
        except ValueError:
            raise NonNumericCellError(f"column {name!r}, row {i + 1}: {cell!r} is not numeric") from None
        if not math.isfinite(value):
            raise NonNumericCellError(f"column {name!r}, row {i + 1}: non-finite value {cell!r}")
        out[k] = value
    return out


def fit_encoding_stats(
    raw: RawTable, schema: FeatureSchema, fit_rows: Sequence[int]
) -> EncodingStats:
    """Fit z-score statistics on the named rows only.

    The caller passes training row indices; evaluation rows must never be in
    ``fit_rows``, which is what keeps the encoding leakage-free.  Categorical
    vocabularies come from the schema when pinned there, otherwise from the
    distinct values seen in the fit rows (sorted).
    """
    fit_rows = list(fit_rows)
    if not fit_rows:
        raise EmptyFitSetError("cannot fit encoding statistics on zero rows")
    for i in fit_rows:
        if not 0 <= i < raw.n_rows:
            raise IndexError(f"fit row {i} outside [0, {raw.n_rows})")

    means: dict[str, float] = {}
    scales: dict[str, float] = {}
    for col in schema.feature_columns(KIND_CONTINUOUS):
        values = _parse_continuous(raw, col.name, fit_rows)
        means[col.name] = float(np.mean(values))
        scales[col.name] = float(np.std(values))  # population form, divisor n

    vocab: dict[str, tuple[str, ...]] = {}
    pinned = schema.vocabularies or {}
    for col in schema.feature_columns(KIND_CATEGORICAL):
        if col.name in pinned:
            vocab[col.name] = tuple(pinned[col.name])
        else:
            j = raw.column_index(col.name)
            vocab[col.name] = tuple(sorted({raw.rows[i][j] for i in fit_rows}))
    return EncodingStats(means, scales, vocab)


@dataclass(frozen=True, eq=False)
class EncodedDataset:
    """Dense features plus integer labels, ready for training."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise ShapeMismatchError(f"features must be 2-d, got shape {self.features.shape}")
        if self.labels.ndim != 1 or self.labels.shape[0] != self.features.shape[0]:
            raise ShapeMismatchError("labels must be a vector matching the feature rows")
        if self.features.shape[1] != len(self.feature_names):
            raise ShapeMismatchError("feature_names must match feature width")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("encoded features must be finite")
        if self.n_classes < 2:
            raise InvalidConfigError(f"n_classes must be at least 2, got {self.n_classes}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError("labels outside [0, n_classes)")

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: Sequence[int] | np.ndarray) -> "EncodedDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return EncodedDataset(
            self.features[idx], self.labels[idx], self.n_classes, self.feature_names
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def concat_datasets(parts: Sequence[EncodedDataset]) -> EncodedDataset:
    """Stack datasets row-wise; all parts must agree on width and classes."""
    if not parts:
        raise ValueError("nothing to concatenate")
    first = parts[0]
    for p in parts[1:]:
        if p.n_features != first.n_features or p.n_classes != first.n_classes:
            raise ShapeMismatchError("datasets disagree on feature width or class count")
        if p.feature_names != first.feature_names:
            raise ShapeMismatchError("datasets disagree on feature names")
    return EncodedDataset(
        np.concatenate([p.features for p in parts], axis=0),
        np.concatenate([p.labels for p in parts], axis=0),
        first.n_classes,
        first.feature_names,
    )


def encode(raw: RawTable, schema: FeatureSchema, stats: EncodingStats) -> EncodedDataset:
    """Encode rows with previously fitted statistics.

    Continuous columns are z-scored (zero-spread columns encode to 0),
    categorical columns are one-hot over the fitted vocabulary with unseen
    values mapping to an all-zero block, and the target becomes its index in
    ``schema.target_classes``.
    """
    n = raw.n_rows
    all_rows = range(n)
    blocks: list[np.ndarray] = []
    names: list[str] = []
    for col in schema.feature_columns():
        if col.kind == KIND_CONTINUOUS:
            values = _parse_continuous(raw, col.name, all_rows)
            scale = stats.scales[col.name]
            if scale == 0.0:
                z = np.zeros(n, dtype=np.float64)
            else:
                z = (values - stats.means[col.name]) / scale
            blocks.append(z[:, None])
            names.append(col.name)
        else:
            levels = stats.vocabularies[col.name]
            position = {v: k for k, v in enumerate(levels)}
            onehot = np.zeros((n, len(levels)), dtype=np.float64)
            j = raw.column_index(col.name)
            for i in range(n):
                k = position.get(raw.rows[i][j])
                if k is not None:
                    onehot[i, k] = 1.0
            blocks.append(onehot)
            names.extend(f"{col.name}={v}" for v in levels)

    target_index = {v: k for k, v in enumerate(schema.target_classes)}
    j = raw.column_index(schema.target_column)
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        cell = raw.rows[i][j]
        try:
            labels[i] = target_index[cell]
        except KeyError:
            raise UnknownTargetClassError(
                f"row {i + 1}: target {cell!r} not in {list(schema.target_classes)}"
            ) from None

    features = np.concatenate(blocks, axis=1) if blocks else np.zeros((n, 0))
    return EncodedDataset(features, labels, len(schema.target_classes), tuple(names))


def _split_target(n: int, fraction: float) -> int:
    return int(np.floor(fraction * n + 0.5))


def stratified_split_indices(
    labels: np.ndarray, test_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Pick test rows per class; returns (train, test) index arrays, sorted.

    Each class contributes floor(test_fraction * class size) rows, then the
    classes with the largest fractional remainders are topped up one row each
    until the overall test size reaches round(test_fraction * n).  Within a
    class the chosen rows are uniform, driven by the seed.
    """
    if not 0.0 < test_fraction < 1.0:
        raise InvalidFractionError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    y = np.asarray(labels, dtype=np.int64)
    n = y.shape[0]
    target_total = _split_target(n, test_fraction)
    if target_total == 0 or target_total == n:
        raise StratificationImpossibleError(
            f"test_fraction {test_fraction} leaves an empty side for {n} rows"
        )

    classes = np.unique(y)
    sizes = {c: int(np.sum(y == c)) for c in classes}
    takes = {c: int(np.floor(test_fraction * sizes[c])) for c in classes}
    shortfall = target_total - sum(takes.values())
    if shortfall > 0:
        # largest remainder first; ties broken by class index for determinism
        by_remainder = sorted(
            classes, key=lambda c: (-(test_fraction * sizes[c] - takes[c]), c)
        )
        for c in by_remainder[:shortfall]:
            takes[c] += 1
    for c in classes:
        if takes[c] > sizes[c]:
            raise StratificationImpossibleError(
                f"class {c} has {sizes[c]} rows, cannot place {takes[c]} in test"
            )

    rng = np.random.default_rng(seed)
    test_parts = []
    for c in classes:
        members = np.flatnonzero(y == c)
        picked = rng.permutation(members.shape[0])[: takes[c]]
        test_parts.append(members[picked])
    test_idx = np.sort(np.concatenate(test_parts))
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    train_idx = np.flatnonzero(~mask)
    if train_idx.size == 0 or test_idx.size == 0:
        raise StratificationImpossibleError("split produced an empty side")
    return train_idx, test_idx


def stratified_split(
    data: EncodedDataset, test_fraction: float, seed: int
) -> tuple[EncodedDataset, EncodedDataset]:
    """Class-stratified train/test split of an encoded dataset."""
    train_idx, test_idx = stratified_split_indices(data.labels, test_fraction, seed)
    return data.subset(train_idx), data.subset(test_idx)


def partition_clients(
    data: EncodedDataset, n_clients: int, seed: int
) -> list[np.ndarray]:
    """Deal rows to clients, stratified and near-even; returns sorted index arrays.

    Rows of each class are shuffled and dealt round-robin through a cursor
    that carries over between classes, so client sizes differ by at most one
    overall and per class.
    """
    if n_clients < 1:
        raise InvalidConfigError(f"n_clients must be at least 1, got {n_clients}")
    if n_clients > data.n_samples:
        raise TooManyClientsError(
            f"cannot split {data.n_samples} rows across {n_clients} clients"
        )
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(n_clients)]
    cursor = 0
    for c in np.unique(data.labels):
        members = np.flatnonzero(data.labels == c)
        shuffled = members[rng.permutation(members.shape[0])]
        for row in shuffled:
            buckets[cursor].append(int(row))
            cursor = (cursor + 1) % n_clients
    return [np.sort(np.asarray(b, dtype=np.int64)) for b in buckets]


@dataclass(frozen=True, eq=False)
class ClientPartition:
    """One client's encoded train/test data plus row provenance."""

    client_id: int
    train: EncodedDataset
    test: EncodedDataset
    train_rows: np.ndarray
    test_rows: np.ndarray

    def __post_init__(self) -> None:
        if self.client_id < 0:
            raise InvalidConfigError("client_id must be non-negative")
        if set(self.train_rows.tolist()) & set(self.test_rows.tolist()):
            raise ValueError("train and test rows overlap")
        if self.train_rows.shape[0] != self.train.n_samples:
            raise ShapeMismatchError("train_rows must match train data")
        if self.test_rows.shape[0] != self.test.n_samples:
            raise ShapeMismatchError("test_rows must match test data")


def build_client_partitions(
    raw: RawTable,
    schema: FeatureSchema,
    n_clients: int,
    test_fraction: float,
    seed: int,
    stats_scope: str = "client",
) -> list[ClientPartition]:
    """Run the full preparation pipeline for one experiment context.

    Steps: pin vocabularies on the full table, deal rows to clients, split
    each client's rows into train/test, then encode.  With ``stats_scope``
    'client' each client fits z-score statistics on its own training rows
    (the federated setting, no raw sharing); with 'pooled' one statistics
    set is fitted on the union of all training rows (the centralized
    setting).  One-hot width is identical in both scopes.

    Derived seeds: the deal uses ``seed`` itself and client k's split uses
    ``seed XOR k``.
    """
    if stats_scope not in ("client", "pooled"):
        raise InvalidConfigError(f"unknown stats_scope {stats_scope!r}")
    schema = schema if schema.vocabularies is not None else schema.with_vocabularies_from(raw)
    full = encode(raw, schema, fit_encoding_stats(raw, schema, range(raw.n_rows)))
    if np.any(full.class_counts() == 0):
        raise StratificationImpossibleError("a target class has no rows in the table")

    client_rows = partition_clients(full, n_clients, seed)
    split_rows: list[tuple[np.ndarray, np.ndarray]] = []
    for k, rows in enumerate(client_rows):
        local_train, local_test = stratified_split_indices(
            full.labels[rows], test_fraction, seed ^ k
        )
        split_rows.append((rows[local_train], rows[local_test]))

    if stats_scope == "pooled":
        pooled_train = np.sort(np.concatenate([tr for tr, _ in split_rows]))
        shared_stats = fit_encoding_stats(raw, schema, pooled_train.tolist())

    partitions = []
    for k, (train_rows, test_rows) in enumerate(split_rows):
        if stats_scope == "client":
            stats = fit_encoding_stats(raw, schema, train_rows.tolist())
        else:
            stats = shared_stats
        train = encode(raw.subset(train_rows.tolist()), schema, stats)
        test = encode(raw.subset(test_rows.tolist()), schema, stats)
        partitions.append(ClientPartition(k, train, test, train_rows, test_rows))
    return partitions
