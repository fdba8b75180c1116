"""Out-of-sample evaluation of fixed-weight portfolios on consecutive windows."""
from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np

from .allocator import Portfolio
from .errors import ValidationError
from .market_data import ReturnMatrix
from .risk import VAR, check_measure, measure_fn, portfolio_returns

MARKET = "market"


@dataclass(frozen=True)
class Window:
    start: int  # row offsets into the return matrix, end exclusive
    stop: int
    start_date: dt.date
    end_date: dt.date
    short: bool = False

    def __len__(self):
        return self.stop - self.start


@dataclass(frozen=True)
class WindowResult:
    window: Window
    series: str
    ret: float
    risk: float
    measure: str


@dataclass
class BacktestReport:
    windows: list[Window]
    rows: list[WindowResult] = field(default_factory=list)
    confidence: float = 0.95
    risk_definition: str = "in-window empirical risk of daily weighted log-returns"

    def series(self, name: str) -> list[WindowResult]:
        return [row for row in self.rows if row.series == name]

    def names(self) -> list[str]:
        seen = []
        for row in self.rows:
            if row.series not in seen:
                seen.append(row.series)
        return seen


def split_windows(dates, window_days: int = 10) -> list[Window]:
    dates = list(dates)
    if not dates:
        raise ValidationError("cannot split an empty date list")
    if window_days < 1:
        raise ValidationError(f"window_days must be >= 1, got {window_days}")
    out = []
    for k in range(math.ceil(len(dates) / window_days)):
        lo, hi = k * window_days, min(len(dates), (k + 1) * window_days)
        out.append(Window(lo, hi, dates[lo], dates[hi - 1], short=(hi - lo) < window_days))
    return out


def _check_window(r: ReturnMatrix, w: Window) -> None:
    if not (0 <= w.start < w.stop <= len(r.dates)) or r.dates[w.start] != w.start_date \
            or r.dates[w.stop - 1] != w.end_date:
        raise ValidationError(
            f"window {w.start_date}..{w.end_date} is outside the available dates")


def _window_stats(daily: np.ndarray, windows, confidence, measure):
    fn = measure_fn(measure)
    return [(float(daily[w.start:w.stop].sum()), fn(daily[w.start:w.stop], confidence))
            for w in windows]


def evaluate(portfolio: Portfolio, r: ReturnMatrix, windows, confidence: float = 0.95,
             measure: str = VAR) -> list[tuple[float, float]]:
    """Per-window (summed weighted log-return, in-window risk) of a fixed-weight portfolio."""
    weights = portfolio.weight_map()
    missing = sorted(set(weights) - set(r.tickers))
    if missing:
        raise ValidationError(f"portfolio holds tickers absent from returns: {missing}")
    for w in windows:
        _check_window(r, w)
    return _window_stats(portfolio_returns(r, weights), windows, confidence, check_measure(measure))


def compare(portfolios: dict[str, Portfolio], market: ReturnMatrix, r: ReturnMatrix, windows,
            confidence: float = 0.95, measure: str = VAR) -> BacktestReport:
    """Evaluate every named portfolio and the market index on the same windows."""
    if market.dates != r.dates:
        raise ValidationError("market series dates are not aligned with the return matrix")
    if len(market.tickers) != 1:
        raise ValidationError("market series must have exactly one column")
    measure = check_measure(measure)
    report = BacktestReport(list(windows), confidence=confidence)
    for name, p in portfolios.items():
        for w, (ret, risk) in zip(windows, evaluate(p, r, windows, confidence, measure)):
            report.rows.append(WindowResult(w, name, ret, risk, measure))
    for w in windows:
        _check_window(market, w)
    daily = market.returns[:, 0]
    for w, (ret, risk) in zip(windows, _window_stats(daily, windows, confidence, measure)):
        report.rows.append(WindowResult(w, MARKET, ret, risk, measure))
    return report


def align_market(market: ReturnMatrix, dates) -> ReturnMatrix:
    """Restrict an index return series to ``dates``; every date must be present."""
    pos = {d: i for i, d in enumerate(market.dates)}
    missing = [d for d in dates if d not in pos]
    if missing:
        raise ValidationError(
            f"market series lacks {len(missing)} dates, first {missing[0].isoformat()}")
    idx = [pos[d] for d in dates]
    return ReturnMatrix(market.tickers, list(dates), market.returns[idx, :])


BACKTEST_HEADER = ("window_start", "window_end", "series_name", "return", "risk", "measure")


def write_backtest_csv(report: BacktestReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BACKTEST_HEADER)
        for row in report.rows:
            w.writerow([row.window.start_date.isoformat(), row.window.end_date.isoformat(),
                        row.series, repr(row.ret), repr(row.risk), row.measure])
