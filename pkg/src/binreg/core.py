"""Data model for binary regression: validated datasets, group statistics,
and the intercept-extended design matrix with a numerical rank check.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np


class BinregError(Exception):
    """Base class for all errors raised by this package."""


class NonBinaryLabel(BinregError):
    """A response value was not 0 or 1."""


class EmptyGroup(BinregError):
    """One of the label groups is empty; group statistics are undefined."""


class DimensionMismatch(BinregError):
    """Predictor rows do not share a common dimension."""


class NonFiniteValue(BinregError):
    """A predictor entry was NaN or infinite."""


class CsvFormatError(BinregError):
    """A CSV cell could not be parsed; message carries row/column indices."""


@dataclass(frozen=True)
class Dataset:
    """Immutable rows (x_i in R^d, y_i in {0,1}) with validated group counts.

    Both label groups are guaranteed nonempty and every predictor entry is
    finite. Arrays are read-only; instances are safe to share across threads.
    """

    x: np.ndarray
    y: np.ndarray
    n0: int
    n1: int

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class GroupStats:
    """Per-group predictor means and their difference (group 1 minus group 0)."""

    xbar0: np.ndarray
    xbar1: np.ndarray
    delta: np.ndarray


@dataclass(frozen=True)
class DesignMatrix:
    """Predictors with a leading column of ones plus a numerical rank verdict.

    rank_ok is True iff the numerical rank equals d+1 (which requires
    n >= d+1). Rank deficiency is reported, never raised.
    """

    xt: np.ndarray
    rank_ok: bool
    rank_tolerance: float
    rank: int


Row = Tuple[Union[float, Sequence[float], np.ndarray], Union[int, float]]


def _as_vector(value) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise DimensionMismatch(f"predictor must be a scalar or 1-d vector, got shape {arr.shape}")
    return arr


def _check_label(raw) -> int:
    # Accept ints and exact 0.0/1.0 reals; anything else is a data error.
    if isinstance(raw, bool):
        return int(raw)
    if isinstance(raw, (int, np.integer)):
        val = int(raw)
    elif isinstance(raw, (float, np.floating)):
        if raw != 0.0 and raw != 1.0:
            raise NonBinaryLabel(f"label {raw!r} is not 0 or 1")
        val = int(raw)
    else:
        raise NonBinaryLabel(f"label {raw!r} is not 0 or 1")
    if val not in (0, 1):
        raise NonBinaryLabel(f"label {raw!r} is not 0 or 1")
    return val


def dataset_from_arrays(x: np.ndarray, y: np.ndarray) -> Dataset:
    """Validate raw arrays and freeze them into a Dataset."""
    x = np.array(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise DimensionMismatch(f"predictor matrix has invalid shape {x.shape}")
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise NonFiniteValue(f"non-finite predictor at row {bad[0]}, column {bad[1]}")
    y_arr = np.asarray(y)
    if y_arr.shape != (x.shape[0],):
        raise DimensionMismatch(
            f"labels have shape {y_arr.shape}, expected ({x.shape[0]},)")
    labels = np.array([_check_label(v) for v in y_arr.tolist()], dtype=np.int64)
    n1 = int(labels.sum())
    n0 = labels.size - n1
    if n0 == 0 or n1 == 0:
        raise EmptyGroup(f"need observations in both groups, got n0={n0}, n1={n1}")
    x.setflags(write=False)
    labels.setflags(write=False)
    return Dataset(x=x, y=labels, n0=n0, n1=n1)


def build_dataset(rows: Iterable[Row]) -> Dataset:
    """Build a validated Dataset from (predictor, label) pairs.

    Predictors may be scalars (d=1) or vectors of a common dimension.
    """
    rows = list(rows)
    if not rows:
        raise DimensionMismatch("empty input")
    xs = []
    ys = []
    for vec, label in rows:
        xs.append(_as_vector(vec))
        ys.append(label)
    d = xs[0].size
    for i, v in enumerate(xs):
        if v.size != d:
            raise DimensionMismatch(f"row {i} has dimension {v.size}, expected {d}")
    return dataset_from_arrays(np.vstack(xs), np.asarray(ys, dtype=object))


def _column_means(x: np.ndarray) -> np.ndarray:
    # fsum gives compensated summation so the balanced-means identity holds
    # to machine precision even at n in the thousands
    return np.array([math.fsum(x[:, j]) / x.shape[0] for j in range(x.shape[1])])


def group_stats(ds: Dataset) -> GroupStats:
    """Exact per-group means; delta = xbar1 - xbar0 componentwise."""
    mask1 = ds.y == 1
    xbar0 = _column_means(ds.x[~mask1])
    xbar1 = _column_means(ds.x[mask1])
    delta = xbar1 - xbar0
    for arr in (xbar0, xbar1, delta):
        arr.setflags(write=False)
    return GroupStats(xbar0=xbar0, xbar1=xbar1, delta=delta)


def extended_design(ds: Dataset, rank_tolerance: float = 1e-10) -> DesignMatrix:
    """Prepend the intercept column and compute the numerical rank via SVD.

    Singular values below rank_tolerance times the largest singular value
    count as zero. Callers decide what to do about rank deficiency.
    """
    xt = np.column_stack([np.ones(ds.n), ds.x])
    sv = np.linalg.svd(xt, compute_uv=False)
    rank = int(np.sum(sv > rank_tolerance * sv[0])) if sv[0] > 0 else 0
    xt.setflags(write=False)
    return DesignMatrix(xt=xt, rank_ok=(rank == ds.d + 1), rank_tolerance=rank_tolerance,
                        rank=rank)


def read_csv(path) -> Dataset:
    """Load a dataset from CSV: header required, one column named 'y' with
    0/1 values, all other columns numeric predictors in header order.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("empty file: header row required") from None
        header = [h.strip() for h in header]
        if header.count("y") != 1:
            raise CsvFormatError("header must contain exactly one column named 'y'")
        y_col = header.index("y")
        rows = []
        for r, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise CsvFormatError(f"row {r} has {len(record)} cells, expected {len(header)}")
            vals = []
            for c, cell in enumerate(record):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"non-numeric cell at row {r}, column {c} ({header[c]!r}): {cell!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise CsvFormatError("no data rows")
    data = np.asarray(rows, dtype=float)
    y_raw = data[:, y_col]
    x = np.delete(data, y_col, axis=1)
    if x.shape[1] == 0:
        raise CsvFormatError("no predictor columns besides 'y'")
    return dataset_from_arrays(x, y_raw)
