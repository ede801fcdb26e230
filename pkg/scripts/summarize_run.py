"""Print time-averaged errors from the CSV files of a finished run directory."""

import argparse
from pathlib import Path

from tdb_spde.bench import read_csv
from tdb_spde.metrics import time_average


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("run_dir", type=Path)
    args = p.parse_args()
    dirs = sorted(p for p in args.run_dir.glob("r[0-9]*") if p.is_dir()) or [args.run_dir]
    for d in dirs:
        print(f"== {d}")
        for name in ("err_global.csv", "err_boundary.csv"):
            cols = read_csv(d / name)
            t = cols.pop("t")
            for key, vals in cols.items():
                print(f"  {key:<10} avg {time_average(t, vals):.4e}  final {vals[-1]:.4e}")


if __name__ == "__main__":
    main()
