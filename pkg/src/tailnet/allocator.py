"""Minimum-risk long-only allocation as a linear program.

    minimise    sum_i w_i * risk_i
    subject to  sum_i w_i = 1
                sum_i w_i * ret_i >= target
                0 <= w_i <= cap

The LP is solved by a dense two-phase primal simplex working directly on
bounded variables (nonbasic variables sit at either bound), with Bland's
smallest-index rule for both entering and leaving choices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (InfeasibleError, StructurallyInfeasibleError,
                     TargetReturnInfeasibleError, UnboundedError, ValidationError)
from .market_data import ReturnMatrix
from .risk import VAR, check_measure, risk_vector

CUMULATIVE = "cumulative"
MEAN_DAILY = "mean_daily"
RETURN_HORIZONS = (CUMULATIVE, MEAN_DAILY)

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-11
_FEAS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LPProblem:
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ge: np.ndarray
    b_ge: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        n = len(np.atleast_1d(self.c))
        conv = {
            "c": np.asarray(self.c, float).reshape(n),
            "A_eq": np.asarray(self.A_eq, float).reshape(-1, n),
            "b_eq": np.asarray(self.b_eq, float).ravel(),
            "A_ge": np.asarray(self.A_ge, float).reshape(-1, n),
            "b_ge": np.asarray(self.b_ge, float).ravel(),
            "lower": np.broadcast_to(np.asarray(self.lower, float), (n,)).copy(),
            "upper": np.broadcast_to(np.asarray(self.upper, float), (n,)).copy(),
        }
        for k, v in conv.items():
            object.__setattr__(self, k, v)
        if len(self.b_eq) != len(self.A_eq) or len(self.b_ge) != len(self.A_ge):
            raise ValidationError("constraint rows and right-hand sides differ in length")
        if np.any(self.lower > self.upper):
            raise ValidationError("lower bound exceeds upper bound")
        if not np.all(np.isfinite(self.lower)):
            raise ValidationError("lower bounds must be finite")

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class LPSolution:
    x: np.ndarray
    objective: float
    iterations: int


def build_lp(risks, rets, cap: float = 0.3, target: float = 0.0115) -> LPProblem:
    risks = np.asarray(risks, dtype=float).ravel()
    rets = np.asarray(rets, dtype=float).ravel()
    n = len(risks)
    if n < 1 or len(rets) != n:
        raise ValidationError(f"need matching non-empty risk/return vectors, got {n} and {len(rets)}")
    if not 0 < cap <= 1:
        raise ValidationError(f"cap must lie in (0, 1], got {cap}")
    if n * cap < 1 - 1e-12:
        raise StructurallyInfeasibleError(
            f"{n} assets with cap {cap} can hold at most {n * cap:.4g} of the budget")
    return LPProblem(risks, np.ones((1, n)), [1.0], rets.reshape(1, n), [target],
                     np.zeros(n), np.full(n, cap))


class _Tableau:
    """Dense bounded-variable simplex state: ``T = B^-1 [A | I]``."""

    def __init__(self, A, b, lower, upper):
        m, nv = A.shape
        x0 = lower.copy()
        residual = b - A @ x0
        self.sign = np.where(residual < 0, -1.0, 1.0)
        self.T = np.hstack([A * self.sign[:, None], np.eye(m)])
        self.nv, self.m = nv, m
        self.lo = np.concatenate([lower, np.zeros(m)])
        self.hi = np.concatenate([upper, np.full(m, np.inf)])
        self.val = np.concatenate([x0, np.abs(residual)])
        self.basis = list(range(nv, nv + m))
        self.at_upper = np.zeros(nv + m, dtype=bool)
        self.iterations = 0

    def reduced_costs(self, cost):
        return cost - cost[self.basis] @ self.T

    def _pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j

    def run(self, cost, max_iter):
        basic = np.zeros(len(cost), dtype=bool)
        while True:
            if self.iterations > max_iter:
                raise RuntimeError("simplex iteration limit exceeded")
            basic[:] = False
            basic[self.basis] = True
            d = self.reduced_costs(cost)
            movable = (~basic) & (self.hi > self.lo)
            cand = np.flatnonzero(movable & ((~self.at_upper & (d < -_COST_TOL))
                                             | (self.at_upper & (d > _COST_TOL))))
            if cand.size == 0:
                return
            j = int(cand[0])  # Bland: smallest index
            direction = -1.0 if self.at_upper[j] else 1.0
            alpha = direction * self.T[:, j]
            step, leave = self.hi[j] - self.lo[j], None
            for i in range(self.m):
                bi = self.basis[i]
                if alpha[i] > _PIVOT_TOL:
                    ratio, bound = (self.val[bi] - self.lo[bi]) / alpha[i], False
                elif alpha[i] < -_PIVOT_TOL and math.isfinite(self.hi[bi]):
                    ratio, bound = (self.hi[bi] - self.val[bi]) / -alpha[i], True
                else:
                    continue
                ratio = max(ratio, 0.0)
                if ratio < step - 1e-12 or (
                        leave is not None and abs(ratio - step) <= 1e-12 and bi < self.basis[leave[0]]):
                    step, leave = ratio, (i, bound)
            if not math.isfinite(step):
                raise UnboundedError("objective is unbounded below")
            self.iterations += 1
            for i in range(self.m):
                self.val[self.basis[i]] -= step * alpha[i]
            self.val[j] += direction * step
            if leave is None:
                self.at_upper[j] = not self.at_upper[j]
                self.val[j] = self.hi[j] if self.at_upper[j] else self.lo[j]
                continue
            r, to_upper = leave
            out = self.basis[r]
            self.val[out] = self.hi[out] if to_upper else self.lo[out]
            self.at_upper[out] = to_upper
            self.at_upper[j] = False
            self._pivot(r, j)


def simplex_solve(p: LPProblem, max_iter: int | None = None) -> LPSolution:
    n, m_eq, m_ge = p.n, len(p.b_eq), len(p.b_ge)
    # >= rows get surplus variables s >= 0:  A_ge x - s = b_ge
    A = np.zeros((m_eq + m_ge, n + m_ge))
    A[:m_eq, :n] = p.A_eq
    A[m_eq:, :n] = p.A_ge
    A[m_eq:, n:] = -np.eye(m_ge)
    b = np.concatenate([p.b_eq, p.b_ge])
    lower = np.concatenate([p.lower, np.zeros(m_ge)])
    upper = np.concatenate([p.upper, np.full(m_ge, np.inf)])
    tab = _Tableau(A, b, lower, upper)
    nv, m = tab.nv, tab.m
    max_iter = max_iter or 50 * (nv + m + 10)

    phase1 = np.concatenate([np.zeros(nv), np.ones(m)])
    tab.run(phase1, max_iter)
    infeasibility = float(tab.val[nv:].sum())
    if infeasibility > _FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
        y = (phase1[tab.basis] @ tab.T[:, nv:]) * tab.sign
        raise InfeasibleError(
            f"constraints are infeasible (phase-1 residual {infeasibility:.3g})",
            certificate=y, infeasibility=infeasibility)

    # pivot zero-valued artificials out of the basis where possible
    for r in range(m):
        if tab.basis[r] >= nv:
            cols = np.flatnonzero(np.abs(tab.T[r, :nv]) > _PIVOT_TOL)
            cols = [j for j in cols if j not in tab.basis]
            if cols:
                j = int(cols[0])
                tab.val[tab.basis[r]] = 0.0
                tab._pivot(r, j)
    tab.hi[nv:] = 0.0
    tab.val[nv:] = 0.0

    cost = np.concatenate([p.c, np.zeros(m_ge + m)])
    tab.run(cost, max_iter)
    x = np.clip(tab.val[:n], p.lower, p.upper)
    return LPSolution(x=x, objective=float(p.c @ x), iterations=tab.iterations)


@dataclass(frozen=True)
class Portfolio:
    tickers: tuple[str, ...]
    weights: tuple[float, ...]
    objective: float
    achieved_return: float
    measure: str = VAR
    confidence: float = 0.95
    cap: float = 0.3
    target: float = 0.0115
    return_horizon: str = CUMULATIVE
    risks: tuple[float, ...] = field(default=(), repr=False)
    returns: tuple[float, ...] = field(default=(), repr=False)

    def weight_map(self, drop_zero: bool = False) -> dict[str, float]:
        return {t: w for t, w in zip(self.tickers, self.weights) if not (drop_zero and w == 0)}

    def to_dict(self) -> dict:
        return {
            "tickers": list(self.tickers),
            "weights": list(self.weights),
            "objective": self.objective,
            "achieved_return": self.achieved_return,
            "measure": self.measure,
            "confidence": self.confidence,
            "cap": self.cap,
            "target": self.target,
            "return_definition": self.return_horizon,
            "risks": list(self.risks),
            "returns": list(self.returns),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Portfolio":
        return cls(tuple(d["tickers"]), tuple(d["weights"]), d["objective"], d["achieved_return"],
                   d["measure"], d["confidence"], d["cap"], d["target"], d["return_definition"],
                   tuple(d.get("risks", ())), tuple(d.get("returns", ())))


def asset_returns(r: ReturnMatrix, members, horizon: str = CUMULATIVE) -> np.ndarray:
    cols = np.column_stack([r.column(t) for t in members])
    if horizon == CUMULATIVE:
        return cols.sum(axis=0)
    if horizon == MEAN_DAILY:
        return cols.mean(axis=0)
    raise ValidationError(f"unknown return horizon {horizon!r}; expected one of {RETURN_HORIZONS}")


def max_achievable_return(rets, cap: float) -> float:
    """Largest ``sum w_i ret_i`` over the budget/cap box: fill best assets first."""
    left, total = 1.0, 0.0
    for ret in sorted(np.asarray(rets, float), reverse=True):
        w = min(cap, left)
        total += w * ret
        left -= w
        if left <= 0:
            break
    return total


def optimize_portfolio(r: ReturnMatrix, members, measure: str = VAR, confidence: float = 0.95,
                       cap: float = 0.3, target: float = 0.0115,
                       return_horizon: str = CUMULATIVE) -> Portfolio:
    members = sorted(set(members))
    if not members:
        raise ValidationError("candidate set is empty")
    measure = check_measure(measure)
    risks = risk_vector(r, members, confidence).values(measure)
    rets = asset_returns(r, members, return_horizon)
    problem = build_lp(risks, rets, cap, target)
    best = max_achievable_return(rets, cap)
    if target > best + 1e-12:
        raise TargetReturnInfeasibleError(
            f"target return {target:.6g} exceeds the maximum achievable {best:.6g} "
            f"({len(members)} assets, cap {cap})", best)
    sol = simplex_solve(problem)
    w = np.where(np.abs(sol.x) < 1e-12, 0.0, sol.x)
    return Portfolio(
        tickers=tuple(members),
        weights=tuple(float(v) for v in w),
        objective=float(w @ risks),
        achieved_return=float(w @ rets),
        measure=measure,
        confidence=confidence,
        cap=cap,
        target=target,
        return_horizon=return_horizon,
        risks=tuple(float(v) for v in risks),
        returns=tuple(float(v) for v in rets),
    )


def write_portfolio_json(p: Portfolio, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(p.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_portfolio_json(path) -> Portfolio:
    with open(path, encoding="utf-8") as fh:
        return Portfolio.from_dict(json.load(fh))
