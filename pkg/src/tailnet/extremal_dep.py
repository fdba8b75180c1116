"""Extremal dependence measure (EDM) between pairs of return series.

The estimator works in L2-polar coordinates: each joint observation
``(x_i, y_i)`` gets a radius ``R_i`` and an angular cross product
``x_i y_i / R_i**2``.  The EDM estimate is the mean of the angular product
over the ``k`` observations with the largest radii.  Values lie in
``[-0.5, 0.5]``; zero means the extremes of the two series do not occur
together.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, ParseError, ValidationError
from .market_data import ReturnMatrix

DEFAULT_TAIL_FRACTION = 0.2


@dataclass(frozen=True)
class PolarSample:
    radii: np.ndarray
    products: np.ndarray

    @property
    def n(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class EDMEstimate:
    value: float
    k: int
    x: float  # radius threshold: the k-th largest radius
    n: int


@dataclass(frozen=True, eq=False)
class EDMMatrix:
    tickers: tuple[str, ...]
    values: np.ndarray
    tail_fraction: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "tickers", tuple(self.tickers))
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        n = len(self.tickers)
        if v.shape != (n, n):
            raise ValidationError(f"EDM matrix must be {n}x{n}, got {v.shape}")
        if not np.array_equal(v, v.T):
            raise ValidationError("EDM matrix must be symmetric")

    def __eq__(self, other):
        if not isinstance(other, EDMMatrix):
            return NotImplemented
        return self.tickers == other.tickers and np.array_equal(self.values, other.values)

    def value(self, a: str, b: str) -> float:
        return float(self.values[self.tickers.index(a), self.tickers.index(b)])


def _squared_radii_and_products(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"series length mismatch: {x.shape} vs {y.shape}")
    r2 = x * x + y * y
    with np.errstate(invalid="ignore", divide="ignore"):
        prod = np.where(r2 > 0, (x * y) / np.where(r2 > 0, r2, 1.0), 0.0)
    return r2, prod


def polar_transform(x, y) -> PolarSample:
    r2, prod = _squared_radii_and_products(x, y)
    if len(r2) < 1:
        raise ValidationError("polar transform needs at least one observation")
    return PolarSample(np.sqrt(r2), prod)


def exceedance_count(n: int, tail_fraction: float) -> int:
    if not 0 < tail_fraction <= 1:
        raise ValidationError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    # the epsilon keeps e.g. 0.29 * 100 from flooring to 28
    return max(1, math.floor(tail_fraction * n + 1e-9))


def edm_pair(x, y, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> EDMEstimate:
    """Estimate the EDM of two jointly observed series.

    The ``k = max(1, floor(tail_fraction * n))`` largest radii are used;
    equal radii are resolved in favour of later observations.  Zero-radius
    observations are never counted as exceedances, so ``k`` is capped at
    the number of nonzero radii.
    """
    r2, prod = _squared_radii_and_products(x, y)
    n = len(r2)
    if n < 2:
        raise ValidationError("edm_pair needs at least 2 observations")
    positive = int(np.count_nonzero(r2 > 0))
    if positive == 0:
        raise DegenerateSampleError("all radii are zero")
    k = min(exceedance_count(n, tail_fraction), positive)
    idx = np.arange(n)
    # primary key: radius descending; secondary: index descending
    order = np.lexsort((-idx, -r2))[:k]
    value = float(prod[order].sum() / k)
    return EDMEstimate(value=value, k=k, x=float(math.sqrt(r2[order[-1]])), n=n)


def edm_matrix(r: ReturnMatrix, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> EDMMatrix:
    m = len(r.tickers)
    if m < 2:
        raise ValidationError("edm_matrix needs at least 2 tickers")
    values = np.full((m, m), 0.5)
    cols = r.returns
    for p in range(m):
        for q in range(p + 1, m):
            try:
                est = edm_pair(cols[:, p], cols[:, q], tail_fraction)
            except ValidationError as exc:
                raise type(exc)(f"pair ({r.tickers[p]}, {r.tickers[q]}): {exc}") from exc
            values[p, q] = values[q, p] = est.value
    return EDMMatrix(r.tickers, values, tail_fraction)


def write_edm_csv(m: EDMMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", *m.tickers])
        for t, row in zip(m.tickers, m.values):
            w.writerow([t, *(f"{v:.6f}" for v in row)])


def read_edm_csv(path, tail_fraction: float | None = None) -> EDMMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows or rows[0][0] != "ticker":
        raise ParseError("expected header 'ticker,<ticker>...'", 1)
    tickers = rows[0][1:]
    if [row[0] for row in rows[1:]] != tickers:
        raise ParseError("row labels do not match header tickers")
    try:
        values = [[float(v) for v in row[1:]] for row in rows[1:]]
    except ValueError as exc:
        raise ParseError(f"invalid EDM value: {exc}") from None
    return EDMMatrix(tickers, values, tail_fraction)
