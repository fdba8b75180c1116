"""The whole pipeline through the ``tailnet`` command line.

Equivalent shell session::

    tailnet run --price-csv prices.csv --sector-csv sectors.csv \\
        --market-csv market.csv --output-dir out --cap 0.15

Each stage can also be run on its own (``tailnet edm``, ``tailnet graph``,
...), reading its inputs from the files earlier stages wrote.
"""
import json
import pathlib
import tempfile

from tailnet.cli import main
from tailnet.synthetic import write_synthetic_dataset

with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    paths = write_synthetic_dataset(tmp / "data", n_days=303, seed=0)
    config = tmp / "pipeline.cfg"
    config.write_text(
        "# flat key = value file; paths are relative to this file\n"
        "price_csv = data/prices.csv\n"
        "sector_csv = data/sectors.csv\n"
        "market_csv = data/market.csv\n"
        "output_dir = out\n"
        "estimation_end = 2023-12-01\n"
        "cap = 0.15\n"
    )
    code = main(["run", "--config", str(config), "--measure", "ES"])
    print("exit code", code)
    out = tmp / "out"
    for f in sorted(out.iterdir()):
        print(f"  {f.name:16s} {f.stat().st_size:8d} bytes")
    manifest = json.loads((out / "manifest.json").read_text())
    print("backtest sample:", manifest["backtest_sample"])
    pf = json.loads((out / "portfolio.json").read_text())
    print(f"objective {pf['objective']:.4%} with {sum(w > 0 for w in pf['weights'])} holdings")

    # a stage whose input is missing exits with code 3 and names the file
    print("mis on an empty directory ->", main(["mis", "--output-dir", str(tmp / "empty")]))
