"""Synthetic heavy-tailed price panels for demos and tests.

Daily log-returns follow a three-level factor model (market, sector,
idiosyncratic) with Student-t shocks, so joint extremes cluster within
sectors much like real equity data.
"""
from __future__ import annotations

import csv
import datetime as dt
import pathlib

import numpy as np

from .market_data import PriceTable, write_prices_csv

# sector sizes of the 113-stock Shenzhen CSI 300 universe
SECTOR_SIZES = {
    "Information technology": 25,
    "Industrials": 24,
    "Healthcare": 16,
    "Consumer staples": 11,
    "Materials": 10,
    "Communication services": 7,
    "Financials": 7,
    "Consumer discretionary": 7,
    "Real estate": 3,
    "Utilities": 2,
    "Energy": 1,
}


def business_days(start: dt.date, count: int) -> list[dt.date]:
    out, d = [], start
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def synthetic_panel(n_days: int = 243, sector_sizes=None, seed: int = 0, df: float = 3.0,
                    start: dt.date = dt.date(2023, 1, 3)):
    """Return ``(prices, sectors, index_prices)``.

    ``n_days`` price rows give ``n_days - 1`` returns.  ``index_prices`` is an
    equal-weight index over all tickers, as a one-column ``PriceTable``.
    """
    sector_sizes = dict(SECTOR_SIZES if sector_sizes is None else sector_sizes)
    rng = np.random.default_rng(seed)
    tickers, sectors = [], {}
    for s_idx, (sector, size) in enumerate(sector_sizes.items()):
        for i in range(size):
            t = f"S{s_idx:02d}{i:03d}"
            tickers.append(t)
            sectors[t] = sector
    n_ret = n_days - 1
    market = rng.standard_t(df, size=n_ret) * 0.008
    sector_shock = {s: rng.standard_t(df, size=n_ret) * 0.008 for s in sector_sizes}
    rets = np.empty((n_ret, len(tickers)))
    for j, t in enumerate(tickers):
        beta = rng.uniform(0.3, 0.8)
        gamma = rng.uniform(0.0, 1.2)
        drift = rng.normal(0.0003, 0.0004)
        idio = rng.standard_t(df, size=n_ret) * rng.uniform(0.008, 0.016)
        rets[:, j] = drift + beta * market + gamma * sector_shock[sectors[t]] + idio
    logp = np.vstack([np.zeros(len(tickers)), np.cumsum(rets, axis=0)])
    base = rng.uniform(5, 200, size=len(tickers))
    prices = base * np.exp(logp)
    dates = business_days(start, n_days)
    index = 1000.0 * np.exp(np.concatenate([[0.0], np.cumsum(rets.mean(axis=1))]))
    order = np.argsort(tickers)
    table = PriceTable([tickers[i] for i in order], dates, prices[:, order])
    return table, sectors, PriceTable(["MARKET"], dates, index[:, None])


def write_synthetic_dataset(directory, **kwargs) -> dict[str, str]:
    """Write ``prices.csv``, ``sectors.csv`` and ``market.csv`` into ``directory``."""
    d = pathlib.Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    prices, sectors, index = synthetic_panel(**kwargs)
    write_prices_csv(prices, d / "prices.csv")
    with open(d / "sectors.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "sector"])
        for t in sorted(sectors):
            w.writerow([t, sectors[t]])
    with open(d / "market.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "adjusted_close"])
        for day, v in zip(index.dates, index.prices[:, 0]):
            w.writerow([day.isoformat(), repr(float(v))])
    return {k: str(d / f"{k}.csv") for k in ("prices", "sectors", "market")}
