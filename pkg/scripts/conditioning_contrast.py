"""DBO vs DO final error as the stochastic amplitude shrinks next to an O(1) mean."""

import argparse

from tdb_spde import build_case, global_error, init_from_snapshot, integrate, make_config, pcm_integrate
from tdb_spde.kloracle import weighted_svd


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--scales", default="1e-3,1e-6,1e-8,1e-9")
    p.add_argument("--t-final", type=float, default=1.0)
    args = p.parse_args()
    print(f"{'scale':>8} {'sig ratio':>10} {'dbo':>11} {'do':>11} {'do/dbo':>9}")
    for scale in (float(v) for v in args.scales.split(",")):
        cfg = make_config("linadv-dirichlet", sigma_t=scale, sigma_x=scale, t_final=args.t_final)
        P = build_case(cfg)
        sig = weighted_svd(P.V0, P.grid, P.samples, 3).sigma
        V_ref = pcm_integrate(P.model, P.V0, 0.0, cfg.t_final, cfg.dt, stride=10**9).states[-1]
        err = {}
        for method in ("dbo", "do"):
            st = init_from_snapshot(P.V0, P.grid, P.samples, 3, method)
            st = integrate(st, P.model, 0.0, cfg.t_final, cfg.dt, stride=10**9, cond_cap=1e300).states[-1]
            err[method] = global_error(st.reconstruct(), V_ref)
        print(f"{scale:8.0e} {sig[0] / sig[-1]:10.2e} {err['dbo']:11.3e} {err['do']:11.3e} "
              f"{err['do'] / err['dbo']:9.3g}")


if __name__ == "__main__":
    main()
