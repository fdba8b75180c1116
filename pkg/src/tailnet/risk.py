"""Historical-simulation VaR and expected shortfall.

Losses are negated log-returns.  VaR at confidence ``c`` is the
``ceil(c * n)``-th smallest loss (1-indexed, no interpolation); ES is the
mean of the losses strictly above VaR, or VaR itself when none are.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import ValidationError
from .market_data import ReturnMatrix

VAR = "VaR"
ES = "ES"
MEASURES = (VAR, ES)


@dataclass(frozen=True)
class RiskVector:
    tickers: tuple[str, ...]
    var_values: np.ndarray
    es_values: np.ndarray
    confidence: float
    holding_days: int = 1

    def values(self, measure: str) -> np.ndarray:
        return self.var_values if check_measure(measure) == VAR else self.es_values


def check_measure(measure: str) -> str:
    for m in MEASURES:
        if measure.lower() == m.lower():
            return m
    raise ValidationError(f"unknown risk measure {measure!r}; expected VaR or ES")


def _losses(returns, confidence):
    r = np.asarray(returns, dtype=float).ravel()
    if r.size == 0:
        raise ValidationError("empty return sample")
    if not 0 < confidence < 1:
        raise ValidationError(f"confidence must lie in (0, 1), got {confidence}")
    return np.sort(-r)


def _rank(n: int, confidence: float) -> int:
    # guard against 0.95 * n landing a hair above an integer
    return min(n, max(1, math.ceil(confidence * n - 1e-9)))


def var(returns, confidence: float = 0.95) -> float:
    losses = _losses(returns, confidence)
    return float(losses[_rank(len(losses), confidence) - 1])


def es(returns, confidence: float = 0.95) -> float:
    losses = _losses(returns, confidence)
    v = losses[_rank(len(losses), confidence) - 1]
    tail = losses[losses > v]
    return float(tail.mean()) if tail.size else float(v)


def measure_fn(measure: str):
    return var if check_measure(measure) == VAR else es


def risk_vector(r: ReturnMatrix, members: Iterable[str], confidence: float = 0.95) -> RiskVector:
    members = list(members)
    cols = [r.column(t) for t in members]
    return RiskVector(
        tuple(members),
        np.array([var(c, confidence) for c in cols]),
        np.array([es(c, confidence) for c in cols]),
        confidence,
    )


def portfolio_returns(r: ReturnMatrix, weights: Mapping[str, float]) -> np.ndarray:
    total = math.fsum(weights.values())
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"weights sum to {total!r}, expected 1")
    out = np.zeros(len(r.dates))
    for t in sorted(weights):
        out = out + weights[t] * r.column(t)
    return out


def portfolio_risk(r: ReturnMatrix, weights: Mapping[str, float], confidence: float = 0.95,
                   measure: str = VAR) -> float:
    return measure_fn(measure)(portfolio_returns(r, weights), confidence)


def write_risk_csv(rv: RiskVector, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "var", "es", "confidence"])
        for t, v, e in zip(rv.tickers, rv.var_values, rv.es_values):
            w.writerow([t, repr(float(v)), repr(float(e)), repr(rv.confidence)])


def read_risk_csv(path) -> RiskVector:
    tickers, vs, es_, conf = [], [], [], set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            tickers.append(row["ticker"])
            vs.append(float(row["var"]))
            es_.append(float(row["es"]))
            conf.add(float(row["confidence"]))
    if len(conf) != 1:
        raise ValidationError("risk file must use a single confidence level")
    return RiskVector(tuple(tickers), np.array(vs), np.array(es_), conf.pop())
