"""Phase-record persistence, preprocessing, balancing and augmentation.

A record is one subject's slow-time phase vector plus its label. Records
round-trip through a fixed CSV format, get balanced with synthetic
minority oversampling and enlarged with noise-factor copies before
classifier training.
"""

import math
import os
import tempfile
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import as_float_matrix, as_float_vector, check_seed

NORMAL = "normal"
ABNORMAL = "abnormal"
UNLABELED = "unlabeled"
LABELS = (NORMAL, ABNORMAL, UNLABELED)


class DatasetFormatError(ValueError):
    """Raised for malformed dataset CSV files; messages cite line numbers."""


@dataclass(frozen=True, eq=False)
class PhaseRecord:
    """One subject: id, class label, optional true breaths/window, features.

    ``features`` is the processed slow-time phase vector fed to the
    classifier (512 samples at the default radar configuration).
    """

    id: str
    label: str
    breaths_true: float | None
    features: np.ndarray

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if any(ch in self.id for ch in ",\n\r"):
            raise ValueError(f"record id {self.id!r} may not contain commas or newlines")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.breaths_true is not None and not (
            math.isfinite(self.breaths_true) and self.breaths_true >= 0
        ):
            raise ValueError("breaths_true must be a non-negative finite number")
        object.__setattr__(self, "features", as_float_vector(self.features, "features"))


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/validation partition of a record list."""

    train: list
    validation: list
    seed: int


def _fmt(value):
    return f"{value:.17g}"


def _atomic_write(path, text):
    """Write-then-rename so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_header(n_features):
    cols = ["id", "label", "breaths"]
    cols += [f"p{i:03d}" for i in range(n_features)]
    return ",".join(cols)


def save_csv(records, path, n_features=512):
    """Write records to CSV: header ``id,label,breaths,p000,...``, one row per
    record, floats at 17 significant digits, LF line endings.

    ``n_features`` only sets the header width for an empty record list;
    otherwise the records dictate it.
    """
    if records:
        n_features = records[0].features.size
    lines = [csv_header(n_features)]
    for rec in records:
        if rec.features.size != n_features:
            raise ValueError(
                f"record {rec.id!r} has {rec.features.size} features, expected {n_features}"
            )
        breaths = "" if rec.breaths_true is None else _fmt(rec.breaths_true)
        row = [rec.id, rec.label, breaths] + [_fmt(v) for v in rec.features]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def load_csv(path):
    """Read records written by :func:`save_csv`; exact inverse of it."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DatasetFormatError("missing header: file is empty")
    header = lines[0].split(",")
    if header[:3] != ["id", "label", "breaths"] or len(header) < 4:
        raise DatasetFormatError("missing header: expected 'id,label,breaths,p000,...'")
    n_cols = len(header)
    if any(not name.startswith("p") for name in header[3:]):
        raise DatasetFormatError("missing header: phase columns must be named p<index>")

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        cells = line.split(",")
        if len(cells) != n_cols:
            raise DatasetFormatError(f"row {lineno}: expected {n_cols} columns, got {len(cells)}")
        rec_id, label, breaths_text = cells[0], cells[1], cells[2]
        if label not in LABELS:
            raise DatasetFormatError(f"row {lineno}: unknown label {label!r}")
        if breaths_text == "":
            breaths = None
        else:
            try:
                breaths = float(breaths_text)
            except ValueError:
                raise DatasetFormatError(
                    f"row {lineno}: non-numeric breaths value {breaths_text!r}"
                ) from None
        try:
            features = np.array([float(c) for c in cells[3:]], dtype=np.float64)
        except ValueError:
            raise DatasetFormatError(f"row {lineno}: non-numeric phase value") from None
        try:
            records.append(PhaseRecord(rec_id, label, breaths, features))
        except ValueError as err:
            raise DatasetFormatError(f"row {lineno}: {err}") from None
    return records


def preprocess(record):
    """Remove the record's own feature mean (kills the static-range offset)."""
    centered = record.features - record.features.mean()
    return replace(record, features=centered)


class Standardizer(TransformerMixin, BaseEstimator):
    """Per-feature zero-mean / unit-scale transform fitted on training data.

    Features with zero variance keep scale 1 so they map to exactly 0.
    """

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        if X.shape[0] < 2:
            raise ValueError("standardizer needs at least 2 records to estimate scale")
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale_ = scale
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = as_float_matrix(X)
        if X.shape[1] != self.mean_.size:
            raise ValueError(f"expected {self.mean_.size} features, got {X.shape[1]}")
        return (X - self.mean_) / self.scale_

    @classmethod
    def from_arrays(cls, mean, scale):
        std = cls()
        std.mean_ = as_float_vector(mean, "mean")
        std.scale_ = as_float_vector(scale, "scale")
        if np.any(std.scale_ <= 0):
            raise ValueError("scale values must be positive")
        if std.mean_.size != std.scale_.size:
            raise ValueError("mean and scale must have equal length")
        std.n_features_in_ = std.mean_.size
        return std

    @classmethod
    def identity(cls, n_features):
        return cls.from_arrays(np.zeros(n_features), np.ones(n_features))


def standardize_fit(records):
    """Fit a Standardizer on the given (training) records."""
    return Standardizer().fit(to_matrix(records))


def standardize_apply(standardizer, records):
    """Return new records with standardized features; inputs untouched."""
    if not records:
        return []
    X = standardizer.transform(to_matrix(records))
    return [replace(rec, features=row) for rec, row in zip(records, X)]


def to_matrix(records):
    """Stack record features into an (n_records, n_features) matrix."""
    if not records:
        raise ValueError("no records")
    return np.stack([rec.features for rec in records])


def labels_of(records):
    return [rec.label for rec in records]


def augment_noise(records, factor, seed):
    """One noisy copy per record: x + factor * sigma_x * eps, eps ~ N(0, 1).

    sigma_x is the record's own feature standard deviation, so the factor is
    dimensionless and record-relative. Copies keep label and breaths_true and
    get an ``-aug<factor>`` id suffix. Returns only the new records.
    """
    if not (isinstance(factor, (int, float)) and math.isfinite(factor) and factor >= 0):
        raise ValueError(f"noise factor must be >= 0, got {factor!r}")
    check_seed(seed)
    rng = np.random.default_rng(seed)
    out = []
    for rec in records:
        sigma = rec.features.std()
        noisy = rec.features + factor * sigma * rng.standard_normal(rec.features.size)
        out.append(replace(rec, id=f"{rec.id}-aug{factor:g}", features=noisy))
    return out


def smote(records, k=5, seed=0):
    """Balance classes by synthetic minority oversampling.

    Repeatedly picks a minority record x_i uniformly at random, one of its k
    nearest minority neighbours x_nn (Euclidean, k capped at minority size
    minus one), and emits x_i + u * (x_nn - x_i) with u uniform in [0, 1)
    until both classes have equal counts. Synthetic records carry the
    minority label, no breaths_true, and ids ``smote-0``, ``smote-1``, ...
    Returns the input records plus the synthetics; inputs are not mutated.
    """
    if not (isinstance(k, int) and k >= 1):
        raise ValueError("k must be an integer >= 1")
    check_seed(seed)
    if any(rec.label == UNLABELED for rec in records):
        raise ValueError("SMOTE requires labeled records")
    by_label = {NORMAL: [], ABNORMAL: []}
    for rec in records:
        by_label[rec.label].append(rec)
    n_normal, n_abnormal = len(by_label[NORMAL]), len(by_label[ABNORMAL])
    if n_normal == 0 or n_abnormal == 0:
        raise ValueError("SMOTE requires two classes")
    if n_normal == n_abnormal:
        return list(records)

    minority_label = NORMAL if n_normal < n_abnormal else ABNORMAL
    minority = by_label[minority_label]
    deficit = abs(n_normal - n_abnormal)
    m = len(minority)
    if m < 2:
        raise ValueError("SMOTE requires at least 2 minority records")

    X = to_matrix(minority)
    sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    k_eff = min(k, m - 1)
    # nearest first, excluding self; argsort is stable so ties favour lower index
    neighbour_idx = np.argsort(sq, axis=1, kind="stable")[:, 1 : k_eff + 1]

    rng = np.random.default_rng(seed)
    synthetics = []
    for count in range(deficit):
        i = int(rng.integers(m))
        nn = int(neighbour_idx[i][int(rng.integers(k_eff))])
        u = rng.uniform(0.0, 1.0)
        features = X[i] + u * (X[nn] - X[i])
        synthetics.append(
            PhaseRecord(
                id=f"smote-{count}",
                label=minority_label,
                breaths_true=None,
                features=features,
            )
        )
    return list(records) + synthetics


def split_records(records, train_fraction, seed):
    """Seeded, label-stratified partition into train and validation sets.

    The train side gets round(train_fraction * n) records overall, allocated
    per class by largest remainder so every class ratio matches the fraction
    to within one record. Record order within each side follows the input.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    check_seed(seed)
    if len(records) < 2:
        raise ValueError("need at least 2 records to split")

    by_label = {}
    for idx, rec in enumerate(records):
        by_label.setdefault(rec.label, []).append(idx)
    for label, idxs in by_label.items():
        if len(idxs) < 2:
            raise ValueError(f"cannot stratify: class {label!r} has fewer than 2 records")

    n_train_total = int(math.floor(train_fraction * len(records) + 0.5))
    labels = sorted(by_label)
    quotas = {lbl: train_fraction * len(by_label[lbl]) for lbl in labels}
    base = {lbl: int(math.floor(quotas[lbl])) for lbl in labels}
    remainder = n_train_total - sum(base.values())
    # hand the leftover slots to the largest fractional remainders
    order = sorted(labels, key=lambda l: (-(quotas[l] - base[l]), -len(by_label[l]), l))
    take = dict(base)
    for lbl in order[: max(0, remainder)]:
        take[lbl] += 1

    rng = np.random.default_rng(seed)
    train_idx = []
    for lbl in labels:
        idxs = np.array(by_label[lbl])
        shuffled = idxs[rng.permutation(len(idxs))]
        train_idx.extend(shuffled[: take[lbl]].tolist())
    train_set = set(train_idx)
    train = [rec for i, rec in enumerate(records) if i in train_set]
    validation = [rec for i, rec in enumerate(records) if i not in train_set]
    return DatasetSplit(train=train, validation=validation, seed=seed)
