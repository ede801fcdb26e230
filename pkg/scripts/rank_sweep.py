"""Time-averaged global error of DBO and DO for a list of ranks on one case."""

import argparse

import numpy as np

from tdb_spde import build_case, global_error, init_from_snapshot, integrate, make_config, pcm_integrate
from tdb_spde.metrics import time_average


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--case", default="linadv-dirichlet")
    p.add_argument("--ranks", default="2,3,4")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--t-final", type=float, default=1.0)
    args = p.parse_args()

    cfg = make_config(args.case, d=args.d, q=args.q, t_final=args.t_final, t_switch=0.0)
    P = build_case(cfg)
    ref = pcm_integrate(P.model, P.V0, 0.0, cfg.t_final, cfg.dt, stride=cfg.stride)
    print(f"{'r':>3} {'dbo':>12} {'do':>12}")
    for r in (int(v) for v in args.ranks.split(",")):
        row = []
        for method in ("dbo", "do"):
            st = init_from_snapshot(P.V0, P.grid, P.samples, r, method)
            lr = integrate(st, P.model, 0.0, cfg.t_final, cfg.dt, stride=cfg.stride)
            errs = [global_error(s.reconstruct(), V) for s, V in zip(lr.states, ref.states)]
            row.append(time_average(ref.times, errs))
        print(f"{r:>3} {row[0]:12.4e} {row[1]:12.4e}")


if __name__ == "__main__":
    np.seterr(all="raise")
    main()
