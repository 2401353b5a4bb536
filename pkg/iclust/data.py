"""
Dataset ingestion, standardization and seeded imbalanced subsampling.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import config
from .errors import DataError, SamplingError
from .log import log_event
from .schemas import SamplingSpec

logger = logging.getLogger(__name__)


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; `seed` may be an int or a SeedSequence."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(master_seed: int, count: int, stream: int = 0) -> List[np.random.SeedSequence]:
    """Independent child seeds; distinct `stream` values never share children."""
    root = np.random.SeedSequence(master_seed, spawn_key=(stream,)) if stream else np.random.SeedSequence(master_seed)
    return root.spawn(count)


@dataclass(frozen=True)
class DataMatrix:
    values: np.ndarray
    columns: Tuple[str, ...] = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DataError(f"data matrix must be n x p with n, p >= 1, got shape {v.shape}")
        if not self.columns:
            object.__setattr__(self, "columns", tuple(f"x{j}" for j in range(v.shape[1])))
        bad = ~np.isfinite(v)
        if bad.any():
            r, c = map(int, np.argwhere(bad)[0])
            raise DataError("non-finite value in data matrix", row=r, column=self.columns[c])
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def take(self, rows: Sequence[int]) -> "DataMatrix":
        return DataMatrix(self.values[np.asarray(rows, dtype=int)], self.columns)


@dataclass(frozen=True)
class LabeledDataset:
    matrix: DataMatrix
    labels: Tuple[str, ...]
    # row positions in the source the rows were drawn from, when sampled
    source_rows: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        if len(self.labels) != self.matrix.n:
            raise DataError(f"{len(self.labels)} labels for {self.matrix.n} rows")

    @property
    def groups(self) -> List[str]:
        return sorted(set(self.labels))

    def take(self, rows: Sequence[int]) -> "LabeledDataset":
        rows = [int(r) for r in rows]
        base = self.source_rows
        return LabeledDataset(self.matrix.take(rows), tuple(self.labels[r] for r in rows),
                              tuple(base[r] for r in rows) if base else tuple(rows))

    def with_matrix(self, matrix: DataMatrix) -> "LabeledDataset":
        return LabeledDataset(matrix, self.labels, self.source_rows)

    def to_frame(self, label_column: str = "label") -> pd.DataFrame:
        df = pd.DataFrame(self.matrix.values, columns=list(self.matrix.columns))
        df[label_column] = list(self.labels)
        if self.source_rows is not None:
            df["source_row"] = list(self.source_rows)
        return df


def load_csv(path, label_column: Optional[str] = None) -> LabeledDataset:
    """Read a header-first numeric CSV; the optional label column is kept as strings."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}", path=str(path))
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False,
                         encoding="utf-8", skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataError(f"empty file: {path}", path=str(path))
    except pd.errors.ParserError as e:
        raise DataError(f"ragged rows in {path}: {e}", path=str(path))
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"cannot read {path}: {e}", path=str(path))
    if df.shape[0] == 0:
        raise DataError(f"no data rows in {path}", path=str(path))

    # short rows come back as missing cells even with na_filter off
    missing = df.isna().to_numpy()
    if missing.any():
        r = int(np.argwhere(missing)[0][0])
        raise DataError(f"ragged row {r} in {path}", path=str(path), row=r)

    if label_column is not None:
        if label_column not in df.columns:
            raise DataError(f"label column '{label_column}' not in header", path=str(path),
                            column=label_column)
        labels = tuple(df[label_column].astype(str))
        df = df.drop(columns=[label_column])
    else:
        labels = (config.UNLABELED,) * df.shape[0]
    if df.shape[1] == 0:
        raise DataError(f"no feature columns in {path}", path=str(path))

    values = np.empty(df.shape, dtype=np.float64)
    for j, col in enumerate(df.columns):
        parsed = pd.to_numeric(df[col].str.strip(), errors="coerce").to_numpy(dtype=np.float64)
        bad = ~np.isfinite(parsed)
        if bad.any():
            r = int(np.flatnonzero(bad)[0])
            raise DataError(f"cannot parse '{df[col].iloc[r]}' as a finite number "
                            f"at row {r}, column '{col}'", path=str(path), row=r, column=str(col))
        values[:, j] = parsed
    log_event(logger, logging.INFO, "csv_loaded", path=str(path), n=values.shape[0],
              p=values.shape[1], groups=len(set(labels)))
    return LabeledDataset(DataMatrix(values, tuple(str(c) for c in df.columns)), labels)


class Standardized(NamedTuple):
    matrix: DataMatrix
    means: np.ndarray
    sds: np.ndarray
    constant_columns: List[int]


def standardize(m: DataMatrix) -> Standardized:
    """Z-score every column with the n-1 denominator; constant columns become zeros."""
    if m.n < 2:
        raise DataError(f"standardization needs at least 2 rows, got {m.n}")
    means = m.values.mean(axis=0)
    sds = m.values.std(axis=0, ddof=1)
    constant = np.ptp(m.values, axis=0) == 0
    safe = np.where(constant, 1.0, sds)
    z = (m.values - means) / safe
    z[:, constant] = 0.0
    flagged = [int(j) for j in np.flatnonzero(constant)]
    for j in flagged:
        log_event(logger, logging.WARNING, "constant_column", column=m.columns[j], index=j)
    return Standardized(DataMatrix(z, m.columns), means, sds, flagged)


def destandardize(m: DataMatrix, means: np.ndarray, sds: np.ndarray,
                  constant_columns: Sequence[int] = ()) -> DataMatrix:
    v = m.values * sds + means
    for j in constant_columns:
        v[:, j] = means[j]
    return DataMatrix(v, m.columns)


def sample_imbalanced(ds: LabeledDataset, spec: SamplingSpec) -> List[LabeledDataset]:
    """
    One dataset per replication. Slots are matched to distinct source groups
    (uniformly at random unless pinned) and rows are drawn without replacement,
    then shuffled. Replication r uses the r-th child of SeedSequence(spec.seed).
    """
    groups = ds.groups
    labels = np.asarray(ds.labels)
    members = {g: np.flatnonzero(labels == g) for g in groups}
    slots = len(spec.group_sizes)
    if spec.pinned_labels is None and len(groups) < slots:
        raise SamplingError(f"design needs {slots} groups, source has {len(groups)}")
    if spec.pinned_labels is not None:
        unknown = [g for g in spec.pinned_labels if g not in members]
        if unknown:
            raise SamplingError(f"pinned labels not in source: {unknown}")

    out = []
    for r, child in enumerate(spawn_seeds(spec.seed, spec.replications)):
        rng = make_rng(child)
        if spec.pinned_labels is not None:
            chosen = list(spec.pinned_labels)
        else:
            chosen = [groups[i] for i in rng.choice(len(groups), size=slots, replace=False)]
        rows = []
        for g, size in zip(chosen, spec.group_sizes):
            pool = members[g]
            if size > pool.size:
                raise SamplingError(f"group '{g}' has {pool.size} rows, slot requests {size}",
                                    replication=r, group=g)
            rows.append(rng.choice(pool, size=size, replace=False))
        picked = np.concatenate(rows)
        picked = picked[rng.permutation(picked.size)]
        out.append(ds.take(picked))
        log_event(logger, logging.DEBUG, "replication_sampled", replication=r,
                  groups=chosen, n=int(picked.size))
    return out


def synthetic_blobs(sizes: Sequence[int], centers, scale: float = 1.0,
                    seed: int = 0) -> LabeledDataset:
    """Gaussian mixture with one isotropic component per size; labels are g0, g1, ..."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if centers.shape[0] != len(sizes):
        raise DataError("one center per group size is required")
    rng = make_rng(seed)
    parts, labels = [], []
    for g, (size, c) in enumerate(zip(sizes, centers)):
        parts.append(c + scale * rng.standard_normal((size, centers.shape[1])))
        labels.extend([f"g{g}"] * size)
    return LabeledDataset(DataMatrix(np.vstack(parts)), tuple(labels))
