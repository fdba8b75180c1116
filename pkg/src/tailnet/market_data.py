"""Price/sector ingestion, calendar alignment and log-returns.

Price files are long-format CSV with header ``date,ticker,adjusted_close``.
Tickers present on different calendars are aligned on the intersection of
their dates; no interpolation is ever done.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, ValidationError

PRICE_HEADER = ("date", "ticker", "adjusted_close")
INDEX_HEADER = ("date", "adjusted_close")
SECTOR_HEADER = ("ticker", "sector")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PriceTable:
    tickers: tuple[str, ...]
    dates: tuple[dt.date, ...]
    prices: np.ndarray  # [date, ticker]

    def __post_init__(self):
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "prices", _frozen(self.prices))
        if len(set(self.tickers)) != len(self.tickers):
            raise ValidationError("duplicate tickers in price table")
        if self.prices.shape != (len(self.dates), len(self.tickers)):
            raise ValidationError(
                f"price matrix shape {self.prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.tickers)} tickers")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValidationError("dates must be strictly increasing")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise ValidationError("prices must be finite and strictly positive")

    def __eq__(self, other):
        if not isinstance(other, PriceTable):
            return NotImplemented
        return (self.tickers == other.tickers and self.dates == other.dates
                and np.array_equal(self.prices, other.prices))

    def to_records(self) -> dict[str, dict[dt.date, float]]:
        return {t: dict(zip(self.dates, self.prices[:, j].tolist()))
                for j, t in enumerate(self.tickers)}


@dataclass(frozen=True, eq=False)
class ReturnMatrix:
    tickers: tuple[str, ...]
    dates: tuple[dt.date, ...]
    returns: np.ndarray  # [date, ticker]

    def __post_init__(self):
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "returns", _frozen(self.returns))
        if self.returns.ndim != 2 or self.returns.shape != (len(self.dates), len(self.tickers)):
            raise ValidationError("return matrix shape does not match dates x tickers")
        if not np.all(np.isfinite(self.returns)):
            raise ValidationError("returns must be finite")
        if len(set(self.tickers)) != len(self.tickers):
            raise ValidationError("duplicate tickers in return matrix")

    def __eq__(self, other):
        if not isinstance(other, ReturnMatrix):
            return NotImplemented
        return (self.tickers == other.tickers and self.dates == other.dates
                and np.array_equal(self.returns, other.returns))

    def index_of(self, ticker: str) -> int:
        try:
            return self.tickers.index(ticker)
        except ValueError:
            raise ValidationError(f"unknown ticker {ticker!r}") from None

    def column(self, ticker: str) -> np.ndarray:
        return self.returns[:, self.index_of(ticker)]

    def select_tickers(self, tickers: Iterable[str]) -> "ReturnMatrix":
        tickers = list(tickers)
        idx = [self.index_of(t) for t in tickers]
        return ReturnMatrix(tickers, self.dates, self.returns[:, idx])

    def between(self, start=None, end=None) -> "ReturnMatrix":
        """Rows with ``start <= date <= end`` (either bound optional)."""
        keep = [i for i, d in enumerate(self.dates)
                if (start is None or d >= start) and (end is None or d <= end)]
        return ReturnMatrix(self.tickers, [self.dates[i] for i in keep],
                            self.returns[keep, :].reshape(len(keep), len(self.tickers)))


SectorTable = Mapping[str, str]


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8"), True
    return source, False


def _parse_date(text: str, line: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"invalid ISO-8601 date {text!r}", line) from None


def _parse_price(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"invalid price {text!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite price {text!r}", line)
    if value <= 0:
        raise ValidationError(f"line {line}: non-positive price {value!r}")
    return value


def _rows(source, header: Sequence[str]):
    """Yield ``(line_number, fields)`` after checking the header."""
    fh, close = _open_text(source)
    try:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or tuple(c.strip().lstrip("﻿") for c in first) != tuple(header):
            raise ParseError(f"expected header {','.join(header)!r}, got {first!r}", 1)
        for fields in reader:
            line = reader.line_num
            if not fields or all(not f.strip() for f in fields):
                continue
            if len(fields) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(fields)}", line)
            yield line, [f.strip() for f in fields]
    finally:
        if close:
            fh.close()


def align(records: Mapping[str, Mapping[dt.date, float]]) -> PriceTable:
    """Align per-ticker price series on the dates every ticker shares."""
    if not records:
        raise ValidationError("no tickers")
    tickers = sorted(records)
    for t in tickers:
        if len(records[t]) < 2:
            raise ValidationError(f"ticker {t!r} has fewer than 2 dates")
    common = set.intersection(*(set(records[t]) for t in tickers))
    dates = sorted(common)
    if len(dates) < 2:
        short = tickers[0] if len(tickers) == 1 else ", ".join(tickers)
        raise ValidationError(
            f"fewer than 2 dates shared by all tickers ({short})")
    prices = np.array([[records[t][d] for t in tickers] for d in dates], dtype=float)
    return PriceTable(tickers, dates, prices)


def load_prices(source) -> PriceTable:
    """Read a ``date,ticker,adjusted_close`` CSV (path or text stream)."""
    records: dict[str, dict[dt.date, float]] = defaultdict(dict)
    for line, (d, ticker, price) in _rows(source, PRICE_HEADER):
        if not ticker:
            raise ParseError("empty ticker", line)
        date = _parse_date(d, line)
        value = _parse_price(price, line)
        if date in records[ticker] and records[ticker][date] != value:
            raise ValidationError(f"line {line}: conflicting prices for {ticker} on {date}")
        records[ticker][date] = value
    if not records:
        raise ValidationError("price file contains no rows")
    all_dates = set().union(*(set(v) for v in records.values()))
    if len(all_dates) < 2:
        raise ValidationError("price file needs at least 2 distinct dates")
    return align(records)


def load_index(source, name: str = "MARKET") -> PriceTable:
    """Read a single index level series with header ``date,adjusted_close``."""
    series: dict[dt.date, float] = {}
    for line, (d, price) in _rows(source, INDEX_HEADER):
        date = _parse_date(d, line)
        if date in series:
            raise ValidationError(f"line {line}: duplicate date {date}")
        series[date] = _parse_price(price, line)
    return align({name: series})


def log_returns(p: PriceTable) -> ReturnMatrix:
    logp = np.log(p.prices)
    return ReturnMatrix(p.tickers, p.dates[1:], logp[1:] - logp[:-1])


def load_sectors(source, universe: Iterable[str]) -> dict[str, str]:
    """Read ``ticker,sector`` rows and return a total mapping over ``universe``."""
    mapping: dict[str, str] = {}
    for line, (ticker, sector) in _rows(source, SECTOR_HEADER):
        if not ticker or not sector:
            raise ParseError("empty ticker or sector", line)
        if ticker in mapping and mapping[ticker] != sector:
            raise ValidationError(
                f"line {line}: ticker {ticker!r} has conflicting sectors "
                f"{mapping[ticker]!r} and {sector!r}")
        mapping[ticker] = sector
    out = {}
    for t in sorted(universe):
        if t not in mapping:
            raise ValidationError(f"ticker {t!r} missing from sector file")
        out[t] = mapping[t]
    return out


def write_prices_csv(p: PriceTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PRICE_HEADER)
        for i, d in enumerate(p.dates):
            for j, t in enumerate(p.tickers):
                w.writerow([d.isoformat(), t, repr(float(p.prices[i, j]))])


def write_returns_csv(r: ReturnMatrix, path) -> None:
    """Wide layout ``date,<ticker>...`` with round-trip float precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *r.tickers])
        for i, d in enumerate(r.dates):
            w.writerow([d.isoformat(), *(repr(float(v)) for v in r.returns[i])])


def read_returns_csv(source) -> ReturnMatrix:
    fh, close = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "date" or len(header) < 2:
            raise ParseError("expected header 'date,<ticker>...'", 1)
        dates, rows = [], []
        for fields in reader:
            if not fields:
                continue
            line = reader.line_num
            if len(fields) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(fields)}", line)
            dates.append(_parse_date(fields[0], line))
            try:
                rows.append([float(v) for v in fields[1:]])
            except ValueError:
                raise ParseError("invalid return value", line) from None
    finally:
        if close:
            fh.close()
    values = np.array(rows, dtype=float).reshape(len(dates), len(header) - 1)
    return ReturnMatrix(header[1:], dates, values)
