"""Dataset loading, nominal-column expansion, deterministic halving, presorting.

A :class:`Dataset` is a dense N x D float64 feature matrix plus integer
class labels in {0..K-1}. All loaders reject missing/non-finite values.
The random half-split uses numpy's PCG64 generator so a given seed yields
the same partition on every platform.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (N, D) float64
    labels: np.ndarray  # (N,) int64, values in {0..num_classes-1}
    num_classes: int
    feature_names: tuple[str, ...] = ()
    # For LIBSVM inputs: label_map[new_id] = label as it appeared on disk.
    label_map: tuple[int, ...] | None = None

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise DataError("features must be a non-empty 2-d matrix")
        if labels.shape != (feats.shape[0],):
            raise DataError("labels must be a vector of length N")
        if not np.all(np.isfinite(feats)):
            bad = np.argwhere(~np.isfinite(feats))[0]
            raise DataError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        if self.num_classes < 2:
            raise DataError("num_classes must be >= 2")
        if labels.min() < 0 or labels.max() >= self.num_classes:
            bad = int(np.argmax((labels < 0) | (labels >= self.num_classes)))
            raise DataError(
                f"label {labels[bad]} at row {bad} outside {{0..{self.num_classes - 1}}}"
            )
        names = tuple(self.feature_names) or tuple(f"f{j}" for j in range(feats.shape[1]))
        if len(names) != feats.shape[1]:
            raise DataError("feature_names length must equal D")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[idx].copy(),
            self.labels[idx].copy(),
            self.num_classes,
            self.feature_names,
            self.label_map,
        )


@dataclass(frozen=True)
class FeatureOrder:
    """Per-feature permutations sorting samples by feature value (stable)."""

    features: np.ndarray  # (N, D), shared read-only with the Dataset
    order: np.ndarray  # (D, N) int32; order[d] sorts column d ascending
    is_constant: np.ndarray  # (D,) bool

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]


def _parse_label(token: str, where: str) -> int:
    try:
        val = float(token)
    except ValueError:
        raise DataError(f"{where}: label {token!r} is not a number") from None
    if not val.is_integer() or val < 0:
        raise DataError(f"{where}: label {token!r} is not a non-negative integer")
    return int(val)


def load_csv(path, label_column: int = 0, num_classes: int | None = None) -> Dataset:
    """Load a dense CSV file with one label column.

    A header row is assumed when any cell of the first row fails to parse
    as a number. Row order on disk is preserved exactly.
    """
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if rec:
                rows.append(rec)
    if not rows:
        raise DataError(f"{path}: no samples")

    header: list[str] | None = None
    try:
        for tok in rows[0]:
            float(tok)
    except ValueError:
        header = rows.pop(0)
        if not rows:
            raise DataError(f"{path}: no samples after header") from None

    arity = len(rows[0])
    if not 0 <= label_column < arity:
        raise DataError(f"{path}: label column {label_column} out of range for {arity} columns")
    n, d = len(rows), arity - 1
    if d < 1:
        raise DataError(f"{path}: no feature columns")
    feats = np.empty((n, d), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    for r, rec in enumerate(rows):
        if len(rec) != arity:
            raise DataError(f"{path}: row {r} has {len(rec)} columns, expected {arity}")
        labels[r] = _parse_label(rec[label_column], f"{path}: row {r}")
        c = 0
        for j, tok in enumerate(rec):
            if j == label_column:
                continue
            try:
                v = float(tok)
            except ValueError:
                raise DataError(f"{path}: row {r}, column {j}: bad value {tok!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {r}, column {j}: non-finite value")
            feats[r, c] = v
            c += 1

    k = int(labels.max()) + 1
    if num_classes is not None:
        if k > num_classes:
            bad = int(np.argmax(labels >= num_classes))
            raise DataError(
                f"{path}: row {bad}: label {labels[bad]} >= declared num_classes {num_classes}"
            )
        k = num_classes
    k = max(k, 2)
    names = None
    if header is not None:
        names = tuple(h for j, h in enumerate(header) if j != label_column)
    return Dataset(feats, labels, k, names or ())


def load_libsvm(path, num_classes: int | None = None) -> Dataset:
    """Load a sparse LIBSVM file ("label idx:val" lines, 1-based indices).

    The result is dense with absent entries at 0.0. Labels are remapped to
    contiguous 0-based ids; the on-disk labels are kept in ``label_map``.
    """
    raw_labels: list[int] = []
    entries: list[list[tuple[int, float]]] = []
    max_idx = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            raw_labels.append(_parse_label(toks[0], f"{path}: line {lineno}"))
            row: list[tuple[int, float]] = []
            seen: set[int] = set()
            for tok in toks[1:]:
                try:
                    idx_s, val_s = tok.split(":", 1)
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise DataError(f"{path}: line {lineno}: malformed token {tok!r}") from None
                if idx < 1:
                    raise DataError(f"{path}: line {lineno}: feature index {idx} < 1")
                if idx in seen:
                    raise DataError(f"{path}: line {lineno}: duplicate feature index {idx}")
                if not math.isfinite(val):
                    raise DataError(f"{path}: line {lineno}: non-finite value in {tok!r}")
                seen.add(idx)
                row.append((idx, val))
                max_idx = max(max_idx, idx)
            entries.append(row)
    if not entries:
        raise DataError(f"{path}: no samples")
    if max_idx == 0:
        raise DataError(f"{path}: no features present")

    uniq = sorted(set(raw_labels))
    remap = {lab: i for i, lab in enumerate(uniq)}
    labels = np.array([remap[lab] for lab in raw_labels], dtype=np.int64)
    k = max(len(uniq), 2)
    if num_classes is not None:
        if len(uniq) > num_classes:
            raise DataError(f"{path}: {len(uniq)} distinct labels exceed declared {num_classes}")
        k = num_classes

    feats = np.zeros((len(entries), max_idx), dtype=np.float64)
    for r, row in enumerate(entries):
        for idx, val in row:
            feats[r, idx - 1] = val
    return Dataset(feats, labels, k, (), tuple(uniq))


def one_hot_expand(ds: Dataset, cardinalities: dict[int, int]) -> Dataset:
    """Replace nominal integer-coded columns by groups of binary columns.

    ``cardinalities`` maps a column index to its number of codes c; the
    column is replaced in place by c indicator columns. Other columns,
    sample order, and labels are untouched.
    """
    if not cardinalities:
        return ds
    n, d = ds.features.shape
    for col, card in cardinalities.items():
        if not 0 <= col < d:
            raise DataError(f"one_hot_expand: column {col} out of range")
        if card < 2:
            raise DataError(f"one_hot_expand: column {col}: cardinality must be >= 2")
        vals = ds.features[:, col]
        codes = vals.astype(np.int64)
        if np.any(vals != codes) or codes.min() < 0 or codes.max() >= card:
            bad = int(np.argmax((vals != codes) | (codes < 0) | (codes >= card)))
            raise DataError(
                f"one_hot_expand: column {col}, row {bad}: code {vals[bad]} "
                f"not in {{0..{card - 1}}}"
            )

    cols: list[np.ndarray] = []
    names: list[str] = []
    for j in range(d):
        if j in cardinalities:
            card = cardinalities[j]
            codes = ds.features[:, j].astype(np.int64)
            block = np.zeros((n, card), dtype=np.float64)
            block[np.arange(n), codes] = 1.0
            cols.append(block)
            names.extend(f"{ds.feature_names[j]}={c}" for c in range(card))
        else:
            cols.append(ds.features[:, j : j + 1])
            names.append(ds.feature_names[j])
    return Dataset(np.hstack(cols), ds.labels.copy(), ds.num_classes, tuple(names), ds.label_map)


def split_half_indices(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic random partition of range(n) into ceil/floor halves.

    Uses ``numpy.random.default_rng`` (PCG64), which is specified and
    stable across platforms; indices within each half are ascending.
    """
    if n < 2:
        raise DataError("split requires at least 2 samples")
    perm = np.random.default_rng(seed).permutation(n)
    cut = (n + 1) // 2
    return np.sort(perm[:cut]), np.sort(perm[cut:])


def split_halves(ds: Dataset, seed: int) -> tuple[Dataset, Dataset]:
    """Randomly split a dataset into disjoint halves (deterministic per seed)."""
    idx_a, idx_b = split_half_indices(ds.num_samples, seed)
    return ds.subset(idx_a), ds.subset(idx_b)


def presort(ds: Dataset) -> FeatureOrder:
    """Stable per-feature sort orders used by exhaustive split search."""
    order = np.argsort(ds.features, axis=0, kind="stable").T.astype(np.int32)
    order = np.ascontiguousarray(order)
    is_constant = (ds.features.min(axis=0) == ds.features.max(axis=0)).copy()
    order.setflags(write=False)
    return FeatureOrder(ds.features, order, is_constant)


def write_csv(path, ds: Dataset, label_column: int = 0) -> None:
    """Write a dataset back to CSV (label first by default), round-trip exact."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i in range(ds.num_samples):
            row = [repr(float(v)) for v in ds.features[i]]
            row.insert(label_column, str(int(ds.labels[i])))
            w.writerow(row)
