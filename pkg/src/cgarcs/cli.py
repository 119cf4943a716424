"""Command-line interface: ``cgarcs {gen,collect,train,solve,bench,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import fields
from pathlib import Path

from . import pipeline
from .colgen import STRATEGIES, CgConfig
from .features import read_dataset, write_dataset
from .instance import (
    SOLOMON_FAMILIES,
    Manifest,
    generate_random,
    generate_solomon_like,
    tighten_windows,
    write_instances,
)
from .learn import ForestHyper, LogisticHyper, ModelError, load_model, save_model
from .network import build_network

log = logging.getLogger("cgarcs")

CONFIG_KEYS = {f.name for f in fields(CgConfig)} | {"tighten", "threads", "keep_fraction"}


def _levels(text: str) -> tuple[float, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        out.append(math.inf if tok in ("inf", "infinity", "none") else float(int(tok)))
    return tuple(out)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
    g.add_argument("--config", type=Path, default=None, help="JSON file with configuration keys")
    g.add_argument("--eta-min", type=int, default=None)
    g.add_argument("--eta-max", type=int, default=None)
    g.add_argument("--redcost-levels", type=_levels, default=None, help="e.g. 10,20,inf")
    g.add_argument("--tighten", type=float, default=None, help="time-window tightening factor in (0, 1]")
    g.add_argument("--max-columns", type=int, default=None, help="columns returned per pricing call")
    g.add_argument("--threads", type=int, default=None)
    g.add_argument("--keep-reduced", action="store_true", help="allow re-enabling the reduced network")
    g.add_argument("-v", "--verbose", action="store_true")


def _settings(args) -> tuple[CgConfig, dict]:
    conf: dict = {}
    if args.config is not None:
        conf = json.loads(Path(args.config).read_text())
        unknown = set(conf) - CONFIG_KEYS
        if unknown:
            raise SystemExit(f"unknown configuration keys: {sorted(unknown)}")
    cli = {
        "rng_seed": args.seed,
        "eta_min": args.eta_min,
        "eta_max": args.eta_max,
        "redcost_levels": args.redcost_levels,
        "max_columns_per_iter": args.max_columns,
        "tighten": args.tighten,
        "threads": args.threads,
    }
    if args.keep_reduced:
        cli["disable_reduced_after_first_failure"] = False
    conf.update({k: v for k, v in cli.items() if v is not None})
    extra = {k: conf.pop(k) for k in ("tighten", "threads", "keep_fraction") if k in conf}
    if "redcost_levels" in conf:
        conf["redcost_levels"] = tuple(
            math.inf if v in (None, "inf") else float(v) for v in conf["redcost_levels"]
        )
    return CgConfig(**conf), extra


def cmd_gen(args) -> int:
    if args.kind == "random":
        insts = [generate_random(args.customers, args.seed + k) for k in range(args.count)]
    else:
        families = args.families.split(",")
        insts = [
            generate_solomon_like(args.customers, families[k % len(families)], args.seed + k)
            for k in range(args.count)
        ]
    manifest = Manifest(generator=f"{args.kind}:{args.customers}", seed=args.seed, tighten=args.tighten)
    if args.tighten is not None:
        insts = [tighten_windows(i, args.tighten) for i in insts]
        manifest.transforms.append(f"tighten_windows(factor={args.tighten!r})")
    for p in write_instances(insts, args.out, manifest):
        print(p)
    return 0


def cmd_collect(args) -> int:
    cfg, extra = _settings(args)
    cfg.strategy = args.expert
    data, summary = pipeline.collect(args.instances, cfg, extra.get("tighten"))
    write_dataset(data, args.out)
    for name in summary.rows:
        print(f"{name}: rows={summary.rows[name]} positive_fraction={summary.positive_fraction[name]:.4f}")
    for name, why in summary.skipped.items():
        print(f"{name}: skipped ({why})", file=sys.stderr)
    print(f"wrote {len(data)} samples to {args.out}")
    return 1 if summary.skipped else 0


def cmd_train(args) -> int:
    _settings(args)  # validates --config
    seed = args.seed or 0
    data = read_dataset(args.dataset)
    try:
        model, metrics, tr, te = pipeline.train(
            data,
            args.kind,
            seed=seed,
            test_fraction=args.test_fraction,
            forest=ForestHyper(n_trees=args.n_trees),
            logistic=LogisticHyper(C=args.C),
        )
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    save_model(model, args.out)
    print(f"trained {args.kind} on {len(tr)} samples ({len(tr.instances())} instances)")
    if metrics is None:
        print("no held-out instances; metrics skipped")
    else:
        print(f"held-out ({len(te.instances())} instances): {metrics.summary()}")
    return 0


def cmd_solve(args) -> int:
    cfg, extra = _settings(args)
    model = load_model(args.model) if args.model else None
    inst = pipeline.load_instance(args.instance, extra.get("tighten"))
    net = build_network(inst)
    out = pipeline.solve(
        net, pipeline.instance_id(args.instance), args.strategy, cfg, model, extra.get("keep_fraction", 0.25)
    )
    timing = not args.no_timing
    if args.trace:
        pipeline.write_trace(out.stats, args.trace, timing)
    if args.report:
        pipeline.write_report([out.row], args.report, timing)
    r = out.row
    print(
        f"{r.instance} {r.strategy}: objective={r.objective!r} iterations={r.iterations} "
        f"(full network {r.full_network_iterations})"
        + (f" pp={r.pp_seconds:.3f}s rmp={r.rmp_seconds:.3f}s total={r.total_seconds:.3f}s" if timing else "")
    )
    return 0


def cmd_bench(args) -> int:
    cfg, extra = _settings(args)
    model = load_model(args.model) if args.model else None
    strategies = [s for s in args.strategies.split(",") if s]
    for s in strategies:
        if s not in STRATEGIES:
            raise SystemExit(f"unknown strategy {s!r}")
    rows = pipeline.bench(
        args.instances,
        strategies,
        cfg,
        model,
        tighten=extra.get("tighten"),
        trace_dir=args.trace_dir,
        timing=not args.no_timing,
        threads=int(extra.get("threads", 1)),
        keep_fraction=extra.get("keep_fraction", 0.25),
    )
    pipeline.write_report(rows, args.out, timing=not args.no_timing)
    _print_table(rows, timing=not args.no_timing)
    failed = [r for r in rows if r.status.startswith("error")]
    return 1 if failed else 0


def _print_table(rows, timing=True) -> None:
    for r in rows:
        line = f"{r.instance:<20} {r.strategy:<14} itr={r.iterations:>7g} ({r.full_network_iterations:g})"
        if timing:
            line += f" PP={r.pp_seconds:8.3f} RMP={r.rmp_seconds:8.3f} Total={r.total_seconds:8.3f}"
            if r.gain_vs_baseline is not None:
                line += f" Gain={r.gain_vs_baseline:6.1f}%"
        line += f" obj={r.objective:.6f} {r.status}"
        print(line)


def cmd_report(args) -> int:
    if args.trace:
        rows = pipeline.read_report(args.trace)
        cum = 0.0
        out = args.out or Path(args.trace).with_suffix(".plot.csv")
        with open(out, "w") as fh:
            fh.write("iteration,network,labels,seconds,cumulative_seconds\n")
            for r in rows:
                sec = float(r.get("pricing_seconds") or 0) + float(r.get("rmp_seconds") or 0)
                cum += sec
                fh.write(f"{r['iteration']},{r['network']},{r['labels']},{sec!r},{cum!r}\n")
        print(f"wrote {out}")
        return 0
    rows = pipeline.read_report(args.report)
    width = max(len(r["instance"]) for r in rows) if rows else 10
    cols = [c for c in ("iterations", "full_network_iterations", "pp_seconds", "rmp_seconds",
                        "total_seconds", "gain_vs_baseline", "abs_gap_vs_baseline") if rows and c in rows[0]]
    print(f"{'instance':<{width}}  {'strategy':<14}" + "".join(f"{c:>24}" for c in cols))
    for r in rows:
        cells = [f"{float(r[c]):.6g}" if r[c] else "" for c in cols]
        print(f"{r['instance']:<{width}}  {r['strategy']:<14}" + "".join(f"{v:>24}" for v in cells))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgarcs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write generated instances in Solomon format")
    p.add_argument("--kind", choices=("solomon", "random"), default="solomon")
    p.add_argument("--families", default=",".join(SOLOMON_FAMILIES))
    p.add_argument("--customers", type=int, default=25)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("collect", help="run CG per instance and write the labeled arc dataset")
    p.add_argument("instances", nargs="*")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--expert", choices=("baseline", "redcost_s"), default="baseline")
    _common(p)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("train", help="train an arc classifier on a dataset")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--kind", choices=("forest", "logistic"), default="forest")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n-trees", type=int, default=500)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--test-fraction", type=float, default=0.2)
    _common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("solve", help="solve one instance with one strategy")
    p.add_argument("instance")
    p.add_argument("--strategy", choices=STRATEGIES, default="baseline")
    p.add_argument("--model", type=Path)
    p.add_argument("--trace", type=Path)
    p.add_argument("--report", type=Path)
    p.add_argument("--no-timing", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="instances x strategies comparison report")
    p.add_argument("instances", nargs="+")
    p.add_argument("--strategies", default="baseline,ml_s,redcost_s")
    p.add_argument("--model", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--trace-dir", type=Path)
    p.add_argument("--no-timing", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="print a bench report or make a trace plot-ready")
    p.add_argument("report", nargs="?")
    p.add_argument("--trace", type=Path)
    p.add_argument("--out", type=Path)
    _common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    if args.command == "gen" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
