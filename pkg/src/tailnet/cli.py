"""Command-line driver for the end-to-end pipeline.

Every subcommand runs one stage and communicates with the others only
through files in the output directory, so ``run`` is literally the stages
executed in order.  Configuration comes from a flat ``key = value`` file;
command-line flags override it.

Exit codes: 0 success, 1 validation error, 2 infeasible optimisation,
3 I/O error (including a missing upstream artifact).
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import hashlib
import json
import pathlib
import sys
from dataclasses import dataclass, field

from . import __version__
from .allocator import RETURN_HORIZONS, optimize_portfolio, read_portfolio_json, write_portfolio_json
from .backtest import align_market, compare, split_windows, write_backtest_csv
from .depnet import (DEFAULT_THRESHOLDS, build_graph, degree_ccdf, fit_power_law, network_stats,
                     read_graph_json, threshold_sweep, write_ccdf_csv, write_edge_list,
                     write_graph_json, write_stats_json, write_sweep_csv)
from .errors import InfeasibleError, InsufficientDataError, TailnetError, ValidationError
from .extremal_dep import edm_matrix, read_edm_csv, write_edm_csv
from .market_data import (load_index, load_prices, load_sectors, log_returns, read_returns_csv,
                          write_returns_csv)
from .mis import mis_per_block, read_mis_csv, union_members, write_mis_csv
from .partition import (girvan_newman, read_partition_csv, sector_partition, write_dendrogram_csv,
                        write_partition_csv)
from .risk import check_measure, risk_vector, write_risk_csv

EXIT_OK, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3

ARTIFACTS = {
    "returns": "returns.csv",
    "edm": "edm.csv",
    "graph": "graph.json",
    "edges": "edges.csv",
    "stats": "stats.json",
    "ccdf": "ccdf.csv",
    "sweep": "sweep.csv",
    "communities": "communities.csv",
    "dendrogram": "dendrogram.csv",
    "mis": "mis.csv",
    "risk": "risk.csv",
    "portfolio": "portfolio.json",
    "backtest": "backtest.csv",
}


@dataclass
class PipelineConfig:
    price_csv: str | None = None
    sector_csv: str | None = None
    market_csv: str | None = None
    output_dir: str = "tailnet-out"
    tail_fraction: float = 0.2
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    theta: float = 0.15
    partition_method: str = "community"
    target_blocks: int | None = None
    confidence: float = 0.95
    measure: str = "VaR"
    cap: float = 0.3
    target_return: float = 0.0115
    return_horizon: str = "cumulative"
    window_days: int = 10
    exact_mis_cutoff: int = 25
    estimation_end: dt.date | None = None
    block: int | None = None  # restrict the LP to one block's independent set
    base_dir: pathlib.Path = field(default=pathlib.Path("."), repr=False, compare=False)

    def validate(self) -> "PipelineConfig":
        if not 0 < self.tail_fraction <= 1:
            raise ValidationError(f"tail_fraction must lie in (0, 1], got {self.tail_fraction}")
        if not self.thresholds:
            raise ValidationError("thresholds must not be empty")
        if self.partition_method not in ("sector", "community"):
            raise ValidationError(f"partition_method must be sector or community, got {self.partition_method!r}")
        if self.target_blocks is not None and self.target_blocks < 1:
            raise ValidationError("target_blocks must be >= 1")
        if not 0 < self.confidence < 1:
            raise ValidationError(f"confidence must lie in (0, 1), got {self.confidence}")
        self.measure = check_measure(self.measure)
        if not 0 < self.cap <= 1:
            raise ValidationError(f"cap must lie in (0, 1], got {self.cap}")
        if self.return_horizon not in RETURN_HORIZONS:
            raise ValidationError(f"return_horizon must be one of {RETURN_HORIZONS}")
        if self.window_days < 1:
            raise ValidationError("window_days must be >= 1")
        if not 1 <= self.exact_mis_cutoff <= 30:
            raise ValidationError("exact_mis_cutoff must lie in [1, 30]")
        return self

    def path(self, key: str) -> pathlib.Path:
        value = getattr(self, key)
        if value is None:
            raise ValidationError(f"config key {key!r} is required for this stage")
        p = pathlib.Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out(self) -> pathlib.Path:
        return self.path("output_dir")

    def artifact(self, name: str, must_exist: bool = True) -> pathlib.Path:
        p = self.out / ARTIFACTS[name]
        if must_exist and not p.exists():
            raise FileNotFoundError(f"missing upstream artifact {p} (run the '{name}' stage first)")
        return p

    def echo(self) -> dict:
        d = {}
        for f in dataclasses.fields(self):
            if f.name == "base_dir":
                continue
            v = getattr(self, f.name)
            d[f.name] = v.isoformat() if isinstance(v, dt.date) else (list(v) if isinstance(v, tuple) else v)
        return d


def _parse_value(key: str, text: str):
    text = text.strip()
    ftype = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}[key]
    if text.lower() in ("", "none", "null") and "None" in str(ftype):
        return None
    try:
        if key == "thresholds":
            return tuple(float(t) for t in text.split(",") if t.strip())
        if key == "estimation_end":
            return dt.date.fromisoformat(text)
        if ftype.startswith("float"):
            return float(text)
        if ftype.startswith("int"):
            return int(text)
    except ValueError:
        raise ValidationError(f"bad value for {key}: {text!r}") from None
    return text


CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(PipelineConfig) if f.name != "base_dir")


def read_config_file(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _parse_value(key, value)
    return values


def make_config(config_file=None, overrides: dict | None = None) -> PipelineConfig:
    cfg = PipelineConfig()
    if config_file is not None:
        for k, v in read_config_file(config_file).items():
            setattr(cfg, k, v)
        cfg.base_dir = pathlib.Path(config_file).resolve().parent
    for k, v in (overrides or {}).items():
        setattr(cfg, k, _parse_value(k, v) if isinstance(v, str) else v)
    return cfg.validate()


# ---- stages ---------------------------------------------------------------

def _estimation_returns(cfg):
    r = read_returns_csv(cfg.artifact("returns"))
    if cfg.estimation_end is not None:
        r = r.between(end=cfg.estimation_end)
        if len(r.dates) < 2:
            raise ValidationError(f"fewer than 2 return dates on or before {cfg.estimation_end}")
    return r


def _sectors(cfg, universe):
    if cfg.sector_csv is None:
        return None
    return load_sectors(cfg.path("sector_csv"), universe)


def stage_returns(cfg):
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_returns_csv(log_returns(load_prices(cfg.path("price_csv"))), cfg.artifact("returns", False))


def stage_edm(cfg):
    write_edm_csv(edm_matrix(_estimation_returns(cfg), cfg.tail_fraction), cfg.artifact("edm", False))


def stage_sweep(cfg):
    m = read_edm_csv(cfg.artifact("edm"))
    write_sweep_csv(threshold_sweep(m, cfg.thresholds), cfg.artifact("sweep", False))


def stage_graph(cfg):
    m = read_edm_csv(cfg.artifact("edm"))
    g = build_graph(m, cfg.theta, _sectors(cfg, m.tickers))
    write_graph_json(g, cfg.artifact("graph", False))
    write_edge_list(g, m, cfg.artifact("edges", False))


def stage_stats(cfg):
    g = read_graph_json(cfg.artifact("graph"))
    ccdf = degree_ccdf(g)
    try:
        fit = fit_power_law(ccdf)
    except InsufficientDataError:
        fit = None
    write_stats_json(network_stats(g), cfg.artifact("stats", False), fit, g.threshold)
    write_ccdf_csv(ccdf, cfg.artifact("ccdf", False))


def stage_partition(cfg):
    g = read_graph_json(cfg.artifact("graph"))
    dendro_path = cfg.artifact("dendrogram", False)
    if cfg.partition_method == "sector":
        p = sector_partition(g)
        if dendro_path.exists():
            dendro_path.unlink()
    else:
        p, dendro = girvan_newman(g, cfg.target_blocks)
        write_dendrogram_csv(dendro, dendro_path)
    write_partition_csv(p, cfg.artifact("communities", False))


def _mis_members(cfg):
    sets = read_mis_csv(cfg.artifact("mis"))
    if cfg.block is not None:
        sets = [s for s in sets if s.source_block == cfg.block]
        if not sets:
            raise ValidationError(f"no independent set recorded for block {cfg.block}")
    return union_members(sets)


def stage_mis(cfg):
    g = read_graph_json(cfg.artifact("graph"))
    p = read_partition_csv(cfg.artifact("communities"), g)
    write_mis_csv(mis_per_block(g, p, cfg.exact_mis_cutoff), cfg.artifact("mis", False))


def stage_risk(cfg):
    rv = risk_vector(_estimation_returns(cfg), _mis_members(cfg), cfg.confidence)
    write_risk_csv(rv, cfg.artifact("risk", False))


def stage_optimize(cfg):
    p = optimize_portfolio(_estimation_returns(cfg), _mis_members(cfg), cfg.measure,
                           cfg.confidence, cfg.cap, cfg.target_return, cfg.return_horizon)
    write_portfolio_json(p, cfg.artifact("portfolio", False))


def stage_backtest(cfg):
    r = read_returns_csv(cfg.artifact("returns"))
    portfolio = read_portfolio_json(cfg.artifact("portfolio"))
    if cfg.estimation_end is not None:
        r = r.between(start=cfg.estimation_end + dt.timedelta(days=1))
        if not r.dates:
            raise ValidationError(f"no return dates after estimation_end {cfg.estimation_end}")
    market = align_market(log_returns(load_index(cfg.path("market_csv"))), r.dates)
    windows = split_windows(r.dates, cfg.window_days)
    report = compare({"portfolio": portfolio}, market, r, windows, cfg.confidence, cfg.measure)
    write_backtest_csv(report, cfg.artifact("backtest", False))


STAGES = {
    "returns": stage_returns,
    "edm": stage_edm,
    "sweep": stage_sweep,
    "graph": stage_graph,
    "stats": stage_stats,
    "partition": stage_partition,
    "mis": stage_mis,
    "risk": stage_risk,
    "optimize": stage_optimize,
    "backtest": stage_backtest,
}


def write_manifest(cfg) -> None:
    artifacts = {}
    for name, fname in sorted(ARTIFACTS.items()):
        p = cfg.out / fname
        if p.exists():
            artifacts[fname] = hashlib.sha256(p.read_bytes()).hexdigest()
    doc = {
        "version": __version__,
        "config": cfg.echo(),
        "artifacts": artifacts,
        "backtest_sample": "out-of-sample" if cfg.estimation_end else "in-sample",
        "return_definition": cfg.return_horizon,
        "window_risk": "in-window empirical risk of daily weighted log-returns",
    }
    with open(cfg.out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"[{stage}] {exc}")
        self.stage, self.cause = stage, exc


def run_stage(name: str, cfg: PipelineConfig) -> None:
    try:
        STAGES[name](cfg)
    except (TailnetError, OSError) as exc:
        raise StageError(name, exc) from exc


def run_pipeline(cfg: PipelineConfig) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    for name in STAGES:
        run_stage(name, cfg)
    write_manifest(cfg)


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, InfeasibleError):
        return EXIT_INFEASIBLE
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("-c", "--config", help="flat key = value config file")
    for key in CONFIG_KEYS:
        common.add_argument("--" + key.replace("_", "-"), dest=key, metavar=key.upper())
    parser = argparse.ArgumentParser(prog="tailnet", description=__doc__.splitlines()[0],
                                     parents=[common])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run every stage and write manifest.json")
    for name, fn in STAGES.items():
        sub.add_parser(name, parents=[common], help=f"run the {name} stage")
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_file = args.pop("config", None)
    try:
        cfg = make_config(config_file, args)
        if command == "run":
            run_pipeline(cfg)
        else:
            run_stage(command, cfg)
    except (TailnetError, OSError, StageError) as exc:
        print(f"tailnet: error: {exc}", file=sys.stderr)
        return exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
