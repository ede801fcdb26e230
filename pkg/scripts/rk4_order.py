"""Observed temporal order of full-rank DBO by step halving."""

import numpy as np

from tdb_spde import build_case, init_from_snapshot, integrate, make_config
from tdb_spde.fom import enforce_initial_bc


def main():
    P = build_case(make_config("linadv-dirichlet", n=33, d=2, q=2))
    x, xi = P.grid.axes[0], P.samples.xi
    V0 = enforce_initial_bc(P.model, P.V0 + 0.3 * np.outer(np.sin(np.pi * x / 5), xi[:, 0] * xi[:, 1]))
    # a further halving reaches the roundoff floor of the differences
    dts = [0.04, 0.02, 0.01, 0.005]
    finals = []
    for dt in dts:
        st = init_from_snapshot(V0, P.grid, P.samples, 4)
        finals.append(integrate(st, P.model, 0.0, 1.0, dt, stride=10**9).states[-1].reconstruct())
    diffs = [np.linalg.norm(a - b) for a, b in zip(finals[:-1], finals[1:])]
    for dt, d0, d1 in zip(dts[1:], diffs[:-1], diffs[1:]):
        print(f"dt={dt:<8g} order {np.log2(d0 / d1):.3f}")


if __name__ == "__main__":
    main()
