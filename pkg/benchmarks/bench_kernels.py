"""Compare the compiled labeling kernel against the pure-Python one.

Both kernels are fed the same priced networks (duals taken from a few CG
iterations so reduced costs are realistic) and must return identical paths.

    python benchmarks/bench_kernels.py --customers 25 --instances 3 --repeat 3
"""

from __future__ import annotations

import argparse
import statistics
import time

from cgarcs import _labeling_py
from cgarcs.instance import SOLOMON_FAMILIES, generate_solomon_like, tighten_windows
from cgarcs.network import LOAD, TIME, build_network
from cgarcs.pricing import NEG_EPS, price_arcs, solve_pricing
from cgarcs.rmp import add_columns, init_rmp, solve_lp

try:
    from cgarcs import _labeling as _labeling_c
except ImportError:
    _labeling_c = None


def kernel_args(net, priced):
    return (
        net.out_ptr,
        net.out_arcs,
        net.arc_head,
        priced,
        net.arc_time,
        net.arc_load,
        net.win_lo[:, TIME].copy(),
        net.win_hi[:, TIME].copy(),
        net.win_lo[:, LOAD].copy(),
        net.win_hi[:, LOAD].copy(),
        net.source,
        net.sink,
        NEG_EPS,
    )


def best_of(fn, args, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--customers", type=int, default=25)
    ap.add_argument("--instances", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--tighten", type=float, default=0.8)
    args = ap.parse_args(argv)

    if _labeling_c is None:
        print("compiled kernel not built; only the Python kernel is available")

    rows = []
    for k in range(args.instances):
        fam = SOLOMON_FAMILIES[k % len(SOLOMON_FAMILIES)]
        inst = tighten_windows(generate_solomon_like(args.customers, fam, seed=k), args.tighten)
        net = build_network(inst)
        state = init_rmp(net)
        sol = solve_lp(state)
        for _ in range(3):
            add_columns(state, solve_pricing(net, price_arcs(net, sol.duals)).columns)
            sol = solve_lp(state)
        priced = price_arcs(net, sol.duals)
        a = kernel_args(net, priced)
        t_py, out_py = best_of(_labeling_py.label_setting, a, args.repeat)
        if _labeling_c is not None:
            t_c, out_c = best_of(_labeling_c.label_setting, a, args.repeat)
            same = out_c == out_py
        else:
            t_c, same = float("nan"), True
        rows.append((inst.name, net.n_arcs, out_py[1], t_py, t_c, same))

    print(f"{'instance':<14} {'arcs':>6} {'labels':>9} {'python s':>10} {'cython s':>10} {'speedup':>8} same")
    for name, arcs, labels, t_py, t_c, same in rows:
        print(f"{name:<14} {arcs:>6} {labels:>9} {t_py:>10.4f} {t_c:>10.4f} {t_py / t_c:>8.1f} {same}")
    if _labeling_c is not None:
        print(f"median speedup {statistics.median(r[3] / r[4] for r in rows):.1f}x")
    if not all(r[5] for r in rows):
        raise SystemExit("kernels disagree")


if __name__ == "__main__":
    main()
