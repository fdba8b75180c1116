import datetime as dt
import json
import pathlib
import shutil

import numpy as np
import pytest

from tailnet.cli import ARTIFACTS, STAGES, main, make_config, read_config_file
from tailnet.depnet import network_stats, read_graph_json
from tailnet.errors import ValidationError
from tailnet.market_data import PriceTable, write_prices_csv
from tailnet.synthetic import business_days, write_synthetic_dataset


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    write_synthetic_dataset(d, n_days=120, seed=1)
    return d


def args_for(data, out, *extra):
    return ["--price-csv", str(data / "prices.csv"), "--sector-csv", str(data / "sectors.csv"),
            "--market-csv", str(data / "market.csv"), "--output-dir", str(out),
            "--target-return", "-1", *extra]


def read_all(out):
    return {p.name: p.read_bytes() for p in sorted(pathlib.Path(out).iterdir())}


def write_returns_as_prices(path, tickers, rets):
    rets = np.asarray(rets, float)
    logp = np.vstack([np.zeros(len(tickers)), np.cumsum(rets, axis=0)])
    dates = business_days(dt.date(2023, 1, 2), len(logp))
    write_prices_csv(PriceTable(tickers, dates, 10.0 * np.exp(logp)), path)
    with open(path.parent / "market.csv", "w") as fh:
        fh.write("date,adjusted_close\n")
        for d, v in zip(dates, 100 * np.exp(logp.mean(axis=1))):
            fh.write(f"{d.isoformat()},{float(v)!r}\n")


def test_run_is_deterministic(dataset, tmp_path):
    assert main(["run", *args_for(dataset, tmp_path / "a")]) == 0
    assert main(["run", *args_for(dataset, tmp_path / "b")]) == 0
    a, b = read_all(tmp_path / "a"), read_all(tmp_path / "b")
    assert set(ARTIFACTS.values()) | {"manifest.json"} == set(a)
    # the manifest echoes the output directory, every other artifact is byte-identical
    del a["manifest.json"], b["manifest.json"]
    assert a == b
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["backtest_sample"] == "in-sample"
    assert manifest["return_definition"] == "cumulative"


def test_stages_compose_to_run(dataset, tmp_path):
    assert main(["run", *args_for(dataset, tmp_path / "run")]) == 0
    for stage in STAGES:
        assert main([stage, *args_for(dataset, tmp_path / "staged")]) == 0, stage
    run, staged = read_all(tmp_path / "run"), read_all(tmp_path / "staged")
    del run["manifest.json"]
    assert run == staged


def test_sweep_row_matches_graph(dataset, tmp_path):
    out = tmp_path / "o"
    for stage in ("returns", "edm", "sweep", "graph"):
        assert main([stage, *args_for(dataset, out)]) == 0
    assert main(["edm", *args_for(dataset, tmp_path / "o2")]) == 3  # returns not yet written
    rows = (out / "sweep.csv").read_text().splitlines()
    row = next(r.split(",") for r in rows[1:] if r.startswith("0.15,"))
    s = network_stats(read_graph_json(out / "graph.json"))
    assert int(row[1]) == s.isolated_count and int(row[2]) == s.n_edges
    assert row[3] == f"{s.average_degree:.5f}" and row[5] == f"{s.density:.5f}"
    first = (out / "edm.csv").read_bytes()
    assert main(["edm", *args_for(dataset, out)]) == 0
    assert (out / "edm.csv").read_bytes() == first


def test_missing_artifact_names_file(dataset, tmp_path, capsys):
    assert main(["mis", *args_for(dataset, tmp_path)]) == 3
    assert "graph.json" in capsys.readouterr().err


def test_validation_exit(dataset, tmp_path, capsys):
    assert main(["run", *args_for(dataset, tmp_path, "--confidence", "1.5")]) == 1
    assert main(["run", *args_for(dataset, tmp_path, "--measure", "CVaR")]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("date,ticker,adjusted_close\n2024-01-02,A,-1\n")
    assert main(["returns", "--price-csv", str(bad), "--output-dir", str(tmp_path)]) == 1
    assert "[returns]" in capsys.readouterr().err


def test_three_isolated_tickers(tmp_path):
    # each ticker moves on its own days only, so every pairwise EDM is ~0
    n = 90
    rets = np.full((n, 3), 1e-6)
    for j in range(3):
        rets[j::3, j] = np.linspace(0.01, 0.05, len(rets[j::3, j])) * (-1) ** np.arange(len(rets[j::3, j]))
    write_returns_as_prices(tmp_path / "prices.csv", ("AAA", "BBB", "CCC"), rets)
    common = ["--price-csv", str(tmp_path / "prices.csv"), "--market-csv", str(tmp_path / "market.csv"),
              "--output-dir", str(tmp_path / "out"), "--target-return", "-1"]
    # three candidates cannot fill the budget under a 0.3 cap
    assert main(["run", *common]) == 2
    assert main(["run", *common, "--cap", "0.5"]) == 0
    g = read_graph_json(tmp_path / "out" / "graph.json")
    assert not g.edges
    assert (tmp_path / "out" / "mis.csv").read_text().count("\n") == 4
    portfolio = json.loads((tmp_path / "out" / "portfolio.json").read_text())
    assert portfolio["tickers"] == ["AAA", "BBB", "CCC"]
    assert sum(portfolio["weights"]) == pytest.approx(1, abs=1e-9)


def test_two_candidates_structurally_infeasible(tmp_path, capsys):
    rng = np.random.default_rng(0)
    write_returns_as_prices(tmp_path / "prices.csv", ("AAA", "BBB"), rng.standard_t(3, (80, 2)) * 0.01)
    code = main(["run", "--price-csv", str(tmp_path / "prices.csv"), "--theta", "0.6",
                 "--market-csv", str(tmp_path / "market.csv"), "--output-dir", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "[optimize]" in err and "cap 0.3" in err
    # partial artifacts are kept
    assert (tmp_path / "o" / "mis.csv").exists() and not (tmp_path / "o" / "portfolio.json").exists()


def test_config_file(dataset, tmp_path):
    shutil.copy(dataset / "prices.csv", tmp_path / "prices.csv")
    cfg_path = tmp_path / "pipeline.cfg"
    cfg_path.write_text("# comment\nprice_csv = prices.csv\ntheta = 0.2  # inline\n"
                        "thresholds = 0.1, 0.2\nestimation_end = 2023-04-28\nmeasure = es\n")
    values = read_config_file(cfg_path)
    assert values["thresholds"] == (0.1, 0.2) and values["theta"] == 0.2
    cfg = make_config(cfg_path, {"theta": "0.25"})
    assert cfg.theta == 0.25 and cfg.measure == "ES"
    assert cfg.estimation_end == dt.date(2023, 4, 28)
    assert cfg.path("price_csv") == tmp_path / "prices.csv"
    assert main(["returns", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "tailnet-out" / "returns.csv").exists()
    cfg_path.write_text("colour = blue\n")
    with pytest.raises(ValidationError):
        read_config_file(cfg_path)
    assert main(["returns", "--config", str(cfg_path)]) == 1


def test_out_of_sample_backtest(dataset, tmp_path):
    out = tmp_path / "oos"
    assert main(["run", *args_for(dataset, out, "--estimation-end", "2023-04-28",
                                  "--partition-method", "sector")]) == 0
    rows = (out / "backtest.csv").read_text().splitlines()[1:]
    assert all(r.split(",")[0] > "2023-04-28" for r in rows)
    assert json.loads((out / "manifest.json").read_text())["backtest_sample"] == "out-of-sample"
    assert not (out / "dendrogram.csv").exists()
    assert "sector" in (out / "communities.csv").read_text().splitlines()[1]
