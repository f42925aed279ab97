"""Command-line interface.

Subcommands: train, campaign, gen-data, compare, export-traces.
Exit codes: 0 success, 1 config error, 2 data error, 3 numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .data import SplitSpec, save_csv, split
from .errors import (
    AnminError,
    DataError,
    DivergenceDetected,
    NoConvergence,
    NumericalFailure,
)


def _parse_kv(text):
    out = {}
    if not text:
        return out
    for part in text.split(","):
        k, _, v = part.partition("=")
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def parse_dataset_arg(arg, targets=None, drops=None, column_spec=None):
    """Build a harness dataset spec from a CSV path or 'generator:key=value,...'."""
    for gen in ("sin", "sdf", "dae"):
        if arg.startswith(gen + ":"):
            spec = {"generator": gen}
            spec.update(_parse_kv(arg[len(gen) + 1 :]))
            return spec
    spec = {"csv": arg}
    if targets:
        spec["targets"] = targets
    if drops:
        spec["drop"] = drops
    if column_spec:
        spec["column_spec"] = column_spec
    return spec


def cmd_train(args):
    spec = parse_dataset_arg(args.dataset, args.target, args.drop, args.column_spec)
    data = harness.resolve_dataset(spec)
    mc = harness.MethodConfig(
        name=args.method,
        method=args.method,
        alpha=args.alpha,
        hidden=args.hidden,
        lam=getattr(args, "lambda"),
        tau=args.tau,
        iters=args.iters,
        lr0=args.lr0,
        epochs=args.epochs,
        batch=args.batch,
    )
    tr, te = split(data, SplitSpec(seed=args.seed, split_index=0))
    dataset_id = spec.get("generator") or Path(spec["csv"]).stem
    rec = harness.run_single(tr, te, mc, args.seed, 0, dataset_id)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{rec.run_id}.jsonl"
    harness.write_record(rec, path)
    print(f"wrote {path}")
    print(f"train_mse={rec.train_mse:.6g} test_mse={rec.test_mse:.6g} "
          f"train_r2={rec.train_r2} test_r2={rec.test_r2}")


def cmd_campaign(args):
    cfg = harness.CampaignConfig.from_file(args.config)
    records = harness.run_campaign(cfg)
    print(f"{len(records)} runs written to {cfg.output_dir}")


def cmd_gen_data(args):
    if args.kind == "sin":
        data = harness.resolve_dataset(
            {"generator": "sin", "n": args.n, "d": args.d, "seed": args.seed}
        )
    elif args.kind == "sdf":
        data = harness.resolve_dataset(
            {"generator": "sdf", "image": args.image, "normalize": args.normalize}
        )
    else:
        data = harness.resolve_dataset(
            {"generator": "dae", "image": args.image, "patch": args.patch,
             "stride": args.stride, "noise_sigma": args.sigma, "seed": args.seed}
        )
    save_csv(data, args.out)
    print(f"wrote {args.out} ({data.n} rows, d={data.n_features}, c={data.n_outputs})")


def cmd_compare(args):
    records = harness.load_records(args.records)
    report = harness.compare(records, args.a, args.b, args.metric)
    print(json.dumps(report, indent=2))


def cmd_export_traces(args):
    records = harness.load_records(args.records)
    paths = harness.export_traces(records, args.out)
    print(f"wrote {len(paths)} trace files to {args.out}")


def build_parser():
    p = argparse.ArgumentParser(prog="anmin")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one model on one 80/20 split")
    t.add_argument("--dataset", required=True,
                   help="CSV path or generator spec like sin:n=1000,d=3")
    t.add_argument("--method", required=True, choices=harness.METHODS)
    t.add_argument("--alpha", type=float, default=0.0)
    t.add_argument("--hidden", type=int, default=64)
    t.add_argument("--lambda", type=float, default=0.001)
    t.add_argument("--tau", type=float, default=-10000.0)
    t.add_argument("--iters", type=int, default=30)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.add_argument("--target", action="append", help="CSV target column (repeatable)")
    t.add_argument("--drop", action="append", help="CSV column to drop (repeatable)")
    t.add_argument("--column-spec", help="sidecar JSON column spec")
    t.add_argument("--lr0", type=float, default=0.03)
    t.add_argument("--epochs", type=int, default=300)
    t.add_argument("--batch", type=int, default=256)
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("campaign", help="run a multi-split benchmark campaign")
    c.add_argument("--config", required=True, help="JSON campaign config")
    c.set_defaults(func=cmd_campaign)

    g = sub.add_parser("gen-data", help="generate a dataset CSV")
    g.add_argument("kind", choices=("sin", "sdf", "dae"))
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--image")
    g.add_argument("--normalize", action="store_true")
    g.add_argument("--patch", type=int, default=15)
    g.add_argument("--stride", type=int, default=3)
    g.add_argument("--sigma", type=float, default=10.0)
    g.set_defaults(func=cmd_gen_data)

    cp = sub.add_parser("compare", help="paired t-test between two methods")
    cp.add_argument("--records", required=True)
    cp.add_argument("--a", required=True)
    cp.add_argument("--b", required=True)
    cp.add_argument("--metric", required=True, choices=harness.METRICS)
    cp.set_defaults(func=cmd_compare)

    e = sub.add_parser("export-traces", help="export per-run trace CSVs")
    e.add_argument("--records", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export_traces)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        args.func(args)
    except (NumericalFailure, DivergenceDetected, NoConvergence) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (AnminError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
