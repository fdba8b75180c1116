"""Minimum-risk allocation over a candidate set, then an out-of-sample check.

The first 242 days estimate risk and return; the weights are then held
fixed and evaluated on 10-day windows of the following period against an
equal-weight market index.
"""
import datetime as dt

from tailnet.allocator import max_achievable_return, asset_returns, optimize_portfolio
from tailnet.backtest import compare, split_windows
from tailnet.depnet import build_graph
from tailnet.extremal_dep import edm_matrix
from tailnet.market_data import log_returns
from tailnet.mis import mis_per_block, union_members
from tailnet.partition import girvan_newman
from tailnet.synthetic import synthetic_panel

prices, sectors, index = synthetic_panel(n_days=303, seed=0)
r = log_returns(prices)
cut = r.dates[241]
est, test = r.between(end=cut), r.between(start=cut + dt.timedelta(days=1))

g = build_graph(edm_matrix(est), 0.15, sectors)
p, _ = girvan_newman(g, target_blocks=21)
candidates = union_members(mis_per_block(g, p))
print(f"{len(candidates)} candidates, best reachable return with cap 0.15: "
      f"{max_achievable_return(asset_returns(est, candidates), 0.15):.4f}")

portfolios = {}
for measure in ("VaR", "ES"):
    pf = optimize_portfolio(est, candidates, measure, 0.95, cap=0.15, target=0.0115)
    portfolios[measure] = pf
    held = {t: round(w, 4) for t, w in pf.weight_map(drop_zero=True).items()}
    print(f"{measure}: objective {pf.objective:.4%}, return {pf.achieved_return:.4%}, weights {held}")

market = log_returns(index).between(start=test.dates[0])
report = compare(portfolios, market, test, split_windows(test.dates, 10))
print("\nwindow                    series   return     VaR")
for row in report.rows:
    w = row.window
    print(f"{w.start_date} {w.end_date}  {row.series:7s} {row.ret:+.4f}  {row.risk:+.4f}")
