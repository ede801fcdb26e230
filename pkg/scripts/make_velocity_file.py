"""Tabulate the analytic jet on a grid in the velocity-file format (header ``n1 n2``,
then rows ``x1 x2 u v`` with x2 fastest)."""

import argparse

import numpy as np

from tdb_spde.fom import jet_velocity, write_velocity_file


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("path")
    p.add_argument("--n1", type=int, default=205)
    p.add_argument("--n2", type=int, default=125)
    args = p.parse_args()
    x1 = np.linspace(-5.0, 5.0, args.n1)
    x2 = np.linspace(0.0, 5.0, args.n2)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    u, v = jet_velocity(X1, X2)
    write_velocity_file(args.path, x1, x2, u, v)
    print(f"wrote {args.n1}x{args.n2} velocity table to {args.path}")


if __name__ == "__main__":
    main()
