#!/usr/bin/env python3
"""Run all five decision methods on one bias setting and print the final
quarter's seed-averaged metrics side by side.

    python scripts/compare_methods.py --dim 20000 --l-m-y 4 --seeds 0 20 40
"""

import argparse

import numpy as np

from loansim.params import RunParams
from loansim.policies import Method
from loansim.simulator import run_all_methods


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=20000)
    ap.add_argument("--partitions", type=int, default=8)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 20, 40, 60, 80])
    ap.add_argument("--l-y", type=float, default=0.0)
    ap.add_argument("--l-m-y", type=float, default=0.0)
    ap.add_argument("--l-h-r", type=float, default=0.0)
    ap.add_argument("--l-h-q", type=float, default=0.0)
    ap.add_argument("--l-m", type=float, default=0.0)
    ap.add_argument("--l-y-b", type=float, default=0.0)
    args = ap.parse_args()

    finals = {m: [] for m in Method}
    for seed in args.seeds:
        params = RunParams(dim=args.dim, num_partitions=args.partitions,
                           random_seed=seed, l_y=args.l_y, l_m_y=args.l_m_y,
                           l_h_r=args.l_h_r, l_h_q=args.l_h_q, l_m=args.l_m,
                           l_y_b=args.l_y_b)
        for method, outcomes in run_all_methods(params.sim_config()).items():
            finals[method].append(outcomes[-1])

    print(f"{'method':26s} {'|dSR|':>8s} {'dFPR':>8s} {'dFNR':>8s} "
          f"{'dAcc':>8s} {'profit':>8s} {'granted':>8s}")
    for method, rows in finals.items():
        def avg(fn):
            vals = [fn(o) for o in rows if fn(o) is not None]
            return np.mean(vals) if vals else float("nan")
        print(f"{method.value:26s} "
              f"{avg(lambda o: abs(o.metrics.delta_sr)):8.4f} "
              f"{avg(lambda o: o.metrics.delta_fpr):8.4f} "
              f"{avg(lambda o: o.metrics.delta_fnr):8.4f} "
              f"{avg(lambda o: o.metrics.delta_acc):8.4f} "
              f"{avg(lambda o: o.metrics.profit_cum_norm):8.4f} "
              f"{avg(lambda o: o.metrics.n_granted):8.1f}")


if __name__ == "__main__":
    main()
