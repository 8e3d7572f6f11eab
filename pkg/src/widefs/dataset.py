"""Labeled numeric datasets: CSV ingestion, restriction, sampling, synthesis."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled instance matrix.

    ``features`` is an (N, n) float array, ``labels`` holds one class
    identifier (string) per row.  ``class_names`` is derived: the sorted
    distinct labels.  ``label_indices`` maps each row into ``class_names``.
    Arrays are frozen so instances can be shared across threads.
    """

    name: str
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...] = field(init=False)
    label_indices: np.ndarray = field(init=False)

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=object)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n_rows, n_cols = feats.shape
        if n_rows < 2:
            raise ValueError("a dataset needs at least 2 instances")
        if n_cols < 1:
            raise ValueError("a dataset needs at least 1 feature")
        if labels.shape != (n_rows,):
            raise ValueError("labels length must equal the number of rows")
        if len(self.feature_names) != n_cols:
            raise ValueError("feature_names length must equal the number of columns")
        if len(set(self.feature_names)) != n_cols:
            raise ValueError("duplicate feature names")
        bad = np.argwhere(~np.isfinite(feats))
        if bad.size:
            i, j = bad[0]
            raise ValueError(f"non-finite feature value at (row {i + 1}, col {j + 1})")
        classes = tuple(sorted({str(v) for v in labels}))
        if len(classes) < 2:
            raise ValueError("a dataset needs at least 2 classes")
        index_of = {c: k for k, c in enumerate(classes)}
        y = np.array([index_of[str(v)] for v in labels], dtype=np.intp)
        feats = feats.copy()
        feats.flags.writeable = False
        labels = np.array([str(v) for v in labels], dtype=object)
        labels.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", classes)
        object.__setattr__(self, "label_indices", y)

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> dict[str, int]:
        return {c: int(np.sum(self.label_indices == k)) for k, c in enumerate(self.class_names)}

    def take_rows(self, rows, name: str | None = None) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(
            name=name or self.name,
            features=self.features[rows],
            labels=self.labels[rows],
            feature_names=self.feature_names,
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features)
            and bool(np.all(self.labels == other.labels))
        )


@dataclass(frozen=True)
class SplitPair:
    """A small probe sample plus the disjoint remainder used as holdout."""

    probe: Dataset
    holdout: Dataset


@dataclass(frozen=True)
class FeatureSubset:
    """An ordered set of distinct feature indices into a Dataset."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValueError("feature indices must be non-negative")
        if len(set(idx)) != len(idx):
            raise ValueError("feature indices must be distinct")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    @staticmethod
    def full(n_features: int) -> "FeatureSubset":
        return FeatureSubset(tuple(range(n_features)))


# ---------------------------------------------------------------------------
# CSV ingestion / serialization
# ---------------------------------------------------------------------------

def _resolve_label_column(header: list[str], label_column) -> int:
    if label_column in (None, "last"):
        return len(header) - 1
    if isinstance(label_column, int):
        if not -len(header) <= label_column < len(header):
            raise ValueError(f"label column index {label_column} out of range")
        return label_column % len(header)
    if label_column in header:
        return header.index(label_column)
    if isinstance(label_column, str) and label_column.lstrip("-").isdigit():
        return _resolve_label_column(header, int(label_column))
    raise ValueError(f"label column {label_column!r} not found in header")


def load_csv(path, label_column="last", name: str | None = None) -> Dataset:
    """Load a dataset from a headered CSV file.

    ``label_column`` selects the class column by name, integer position or
    the default "last"; every other column must parse as a finite real.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, header row required") from None
        label_idx = _resolve_label_column(header, label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        rows, labels = [], []
        for r, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise ValueError(f"{path}: row {r} has {len(record)} fields, expected {len(header)}")
            values = []
            col = 0
            for i, cell in enumerate(record):
                if i == label_idx:
                    if cell.strip() == "":
                        raise ValueError(f"{path}: missing label at row {r}")
                    labels.append(cell.strip())
                    continue
                col += 1
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value at (row {r}, col {col}): {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise ValueError(f"{path}: non-finite value at (row {r}, col {col})")
                values.append(v)
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return Dataset(
        name=name or path.stem,
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=object),
        feature_names=tuple(feature_names),
    )


def save_csv(data: Dataset, path) -> None:
    """Write a dataset as CSV (label column last); floats use repr round-trip."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.feature_names) + ["label"])
        for row, label in zip(data.features, data.labels):
            writer.writerow([repr(float(v)) for v in row] + [label])


# ---------------------------------------------------------------------------
# restriction and sampling
# ---------------------------------------------------------------------------

def restrict_to_top2_classes(data: Dataset) -> Dataset:
    """Keep only the two most frequent classes (frequency ties by class name)."""
    counts = data.class_counts()
    ordered = sorted(counts, key=lambda c: (-counts[c], c))
    keep = set(ordered[:2])
    if len(keep) == data.n_classes:
        return data
    rows = np.flatnonzero(np.isin(data.labels.astype(str), sorted(keep)))
    return data.take_rows(rows)


def stratified_split(data: Dataset, per_class: int, seed: int) -> SplitPair:
    """Draw ``per_class`` rows of each class into a probe; the rest is holdout.

    Sampling is uniform without replacement and fully determined by ``seed``.
    Every class must keep at least one holdout row.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    rng = np.random.default_rng(seed)
    probe_rows = []
    for k, cname in enumerate(data.class_names):
        rows = np.flatnonzero(data.label_indices == k)
        if len(rows) <= per_class:
            raise ValueError(
                f"class {cname!r} has {len(rows)} instances; needs more than {per_class}"
            )
        probe_rows.append(rng.choice(rows, size=per_class, replace=False))
    probe_rows = np.sort(np.concatenate(probe_rows))
    mask = np.ones(data.n_instances, dtype=bool)
    mask[probe_rows] = False
    holdout_rows = np.flatnonzero(mask)
    return SplitPair(
        probe=data.take_rows(probe_rows, name=f"{data.name}[probe]"),
        holdout=data.take_rows(holdout_rows, name=f"{data.name}[holdout]"),
    )


# ---------------------------------------------------------------------------
# synthetic generators
# ---------------------------------------------------------------------------

def generate_classifier_dependent_pair(mode: str, seed: int = 0) -> Dataset:
    """Two-feature, two-class dataset where the useful pair depends on the model.

    mode "ldc_wins": the linear discriminant separates the pair perfectly
    under leave-one-out while the nearest neighbour gets every instance
    wrong; mode "nn_wins" reverses the two.  Each feature alone is close
    to useless for both models.  Geometry is deterministic up to a tiny
    seeded jitter that breaks exact distance ties.
    """
    rng = np.random.default_rng(seed)
    if mode == "ldc_wins":
        m, s, g = 10, 1.0, 0.1
        idx = np.arange(m)
        pts_a = np.column_stack([idx * s, np.zeros(m)])
        pts_b = np.column_stack([idx * s + s / 2.0, np.full(m, g)])
        jitter_scale = 1e-6
    elif mode == "nn_wins":
        h = 0.02
        even = np.array([0, 2, 4, 6], dtype=float)
        odd = np.array([1, 3, 5, 7], dtype=float)
        root2 = math.sqrt(2.0)
        # four tight point combs: same-class neighbours dominate in 2-D,
        # while the 1-D shadows of opposite-class combs interleave
        a0 = np.column_stack([1 / root2 + h * even, -1 / root2 + h * even])
        a3 = np.column_stack([5 / root2 + h * odd, 1 / root2 + h * odd])
        b1 = np.column_stack([1 / root2 + h * odd, 1 / root2 + h * even])
        b2 = np.column_stack([5 / root2 + h * even, -1 / root2 + h * odd])
        pts_a = np.vstack([a0, a3])
        pts_b = np.vstack([b1, b2])
        jitter_scale = h * 1e-4
    else:
        raise ValueError(f"unknown mode {mode!r}; use 'ldc_wins' or 'nn_wins'")
    pts = np.vstack([pts_a, pts_b])
    if mode == "ldc_wins":
        rot = math.pi / 4.0
        c, sn = math.cos(rot), math.sin(rot)
        pts = pts @ np.array([[c, sn], [-sn, c]])
    pts = pts + rng.normal(scale=jitter_scale, size=pts.shape)
    labels = np.array(["A"] * len(pts_a) + ["B"] * len(pts_b), dtype=object)
    return Dataset(
        name=f"two_feature_{mode}",
        features=pts,
        labels=labels,
        feature_names=("f1", "f2"),
    )


def generate_gaussian_dataset(
    n_per_class: int = 20,
    n_features: int = 20,
    n_informative: int | None = None,
    shift: float = 1.0,
    seed: int = 0,
    name: str = "gaussian",
) -> Dataset:
    """Two spherical Gaussian classes; the first ``n_informative`` feature
    means differ by ``shift`` (default: 3 or all columns, whichever is
    fewer), the rest are pure noise."""
    if n_informative is None:
        n_informative = min(3, n_features)
    if not 0 <= n_informative <= n_features:
        raise ValueError("n_informative must lie in [0, n_features]")
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(2 * n_per_class, n_features))
    X[n_per_class:, :n_informative] += shift
    labels = np.array(["A"] * n_per_class + ["B"] * n_per_class, dtype=object)
    names = tuple(f"f{i + 1}" for i in range(n_features))
    return Dataset(name=name, features=X, labels=labels, feature_names=names)


def generate_spectral_dataset(
    n_class_a: int = 111,
    n_class_b: int = 97,
    n_features: int = 60,
    separation: float = 0.18,
    noise: float = 0.20,
    seed: int = 2087,
    name: str = "sonar_surrogate",
    class_names: tuple[str, str] = ("M", "R"),
) -> Dataset:
    """Synthetic band-energy spectra in [0, 1] with two overlapping classes.

    Stands in for real echo-spectrum benchmarks at the same shape
    (208 x 60 by default) when the original data is not distributable.
    Class structure lives in a handful of smooth spectral bumps; noise is
    (feature-)autocorrelated so columns are realistically redundant.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, n_features)
    base = 0.35 + 0.25 * np.sin(math.pi * t) + 0.08 * np.sin(5.2 * math.pi * t)
    bumps = [(0.18, 0.05), (0.42, 0.07), (0.71, 0.06), (0.88, 0.04)]
    signs = np.array([1.0, -1.0, 1.0, -1.0])
    diff = np.zeros(n_features)
    for (center, width), sign in zip(bumps, signs):
        diff += sign * np.exp(-((t - center) ** 2) / (2.0 * width**2))
    diff *= separation / np.max(np.abs(diff))

    def sample(n_rows, offset):
        white = rng.normal(size=(n_rows, n_features))
        smooth = np.empty_like(white)
        smooth[:, 0] = white[:, 0]
        rho = 0.7
        for j in range(1, n_features):
            smooth[:, j] = rho * smooth[:, j - 1] + math.sqrt(1 - rho**2) * white[:, j]
        gain = rng.normal(loc=1.0, scale=0.08, size=(n_rows, 1))
        rows = gain * (base + offset) + noise * smooth
        return np.clip(rows, 0.0, 1.0)

    xa = sample(n_class_a, +diff / 2.0)
    xb = sample(n_class_b, -diff / 2.0)
    labels = np.array([class_names[0]] * n_class_a + [class_names[1]] * n_class_b, dtype=object)
    names = tuple(f"band{i + 1:02d}" for i in range(n_features))
    return Dataset(name=name, features=np.vstack([xa, xb]), labels=labels, feature_names=names)
