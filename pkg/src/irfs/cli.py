"""Command-line interface.

Subcommands: `run` (exploration loop), `baseline` (classical selectors),
`report` (regenerate summary + figures from a run directory), and `synth`
(write one of the bundled datasets as CSV). A JSON config file can supply
any flag; explicit flags override it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dataio, harness, synth
from .config import ExplorationConfig

CONFIG_KEYS = {
    "data", "label", "out", "steps", "trainer", "transfer_point", "state",
    "reward", "beta", "lambda", "seed", "gamma", "exploit_prob", "lr",
    "batch_size", "hidden", "memory_capacity", "mi_bins", "plot", "method",
    "k", "ratio", "equal_full_share", "hybrid_order",
}


def _merge_config(args: argparse.Namespace) -> dict:
    """Start from the JSON config file (if any), overlay explicit CLI flags."""
    merged: dict = {}
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text())
        unknown = set(loaded) - CONFIG_KEYS
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        merged[key] = value
    return merged


def _load_split_dataset(opts: dict) -> dataio.Dataset:
    if "data" not in opts or "label" not in opts:
        raise SystemExit("--data and --label are required (flag or config file)")
    dataset = dataio.load_csv(opts["data"], opts["label"])
    if dataset.n_dropped:
        print(f"dropped {dataset.n_dropped} rows with missing values", file=sys.stderr)
    return dataio.split(dataset, ratio=opts.get("ratio", 0.8), seed=opts.get("seed", 0))


def _cmd_run(args) -> int:
    opts = _merge_config(args)
    dataset = _load_split_dataset(opts)
    config = ExplorationConfig(
        steps=opts.get("steps", 1000),
        transfer_point=opts.get("transfer_point"),
        gamma=opts.get("gamma", 0.9),
        exploit_prob=opts.get("exploit_prob", 0.9),
        lr=opts.get("lr", 0.01),
        batch_size=opts.get("batch_size", 16),
        hidden=opts.get("hidden", 128),
        memory_capacity=opts.get("memory_capacity", 2000),
        lam=opts.get("lambda", 0.5),
        beta=opts.get("beta", 0.1),
        state_method=opts.get("state", 1),
        reward_scheme=opts.get("reward", "equal"),
        trainer_mode=opts.get("trainer", "none"),
        seed=opts.get("seed", 0),
        hybrid_order=tuple(opts.get("hybrid_order", ("kbest", "dtree"))),
        equal_full_share=opts.get("equal_full_share", False),
        mi_bins=opts.get("mi_bins", 10),
        plot=opts.get("plot", False),
    )
    result = harness.run_exploration(dataset, config)
    out_dir = Path(opts.get("out", "irfs-out"))
    paths = harness.report(result.records, out_dir, plot=config.plot, config=config)
    accs = result.acc_series
    print(f"steps: {len(accs)}")
    print(f"best acc: {harness.best_acc(accs, 0, len(accs)):.4f}")
    print(f"ave acc:  {harness.ave_acc(accs, 0, len(accs)):.4f}")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return 0


def _cmd_baseline(args) -> int:
    opts = _merge_config(args)
    dataset = _load_split_dataset(opts)
    method = opts.get("method")
    if method is None:
        raise SystemExit("--method is required")
    selection, acc = harness.run_baseline(dataset, method, opts.get("k"))
    entry = {"method": method, "k": len(selection), "acc": acc,
             "selection": sorted(int(i) for i in selection)}
    print(json.dumps(entry, indent=2))
    if opts.get("out"):
        out_dir = Path(opts["out"])
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "baselines.json"
        existing = json.loads(path.read_text()) if path.exists() else {}
        existing[method] = entry
        path.write_text(json.dumps(existing, indent=2, sort_keys=True))
        print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    run_dir = Path(args.in_dir)
    metrics_path = run_dir / "metrics.csv"
    if not metrics_path.exists():
        raise SystemExit(f"no metrics.csv under {run_dir}")
    metrics = harness.read_metrics_csv(metrics_path)
    baselines_path = run_dir / "baselines.json"
    baselines = json.loads(baselines_path.read_text()) if baselines_path.exists() else None
    out_dir = Path(args.out) if args.out else run_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    summary = harness.summarize(metrics["acc"], metrics["advised_flips"], baselines)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True))

    from . import plotting

    acc_path = plotting.save_accuracy_curve(metrics["step"], metrics["acc"],
                                            out_dir / "accuracy_vs_step.svg")
    flips_path = plotting.save_flip_histogram(metrics["advised_flips"],
                                              out_dir / "advised_flips.svg")
    print(f"wrote {summary_path}, {acc_path}, {flips_path}")
    return 0


def _cmd_synth(args) -> int:
    rows = synth.write_csv(args.out, args.name, args.seed)
    print(f"wrote {rows} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irfs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the exploration loop")
    run_p.add_argument("--config", help="JSON config file; flags override it")
    run_p.add_argument("--data", help="input CSV path")
    run_p.add_argument("--label", help="label column name or index")
    run_p.add_argument("--steps", type=int)
    run_p.add_argument("--trainer", choices=("none", "kbest", "dtree", "hybrid"))
    run_p.add_argument("--transfer-point", dest="transfer_point", type=int)
    run_p.add_argument("--state", type=int, choices=(1, 2))
    run_p.add_argument("--reward", choices=("equal", "prs1", "prs2"))
    run_p.add_argument("--beta", type=float)
    run_p.add_argument("--lambda", dest="lambda", type=float)
    run_p.add_argument("--gamma", type=float)
    run_p.add_argument("--exploit-prob", dest="exploit_prob", type=float)
    run_p.add_argument("--lr", type=float)
    run_p.add_argument("--batch-size", dest="batch_size", type=int)
    run_p.add_argument("--hidden", type=int)
    run_p.add_argument("--memory-capacity", dest="memory_capacity", type=int)
    run_p.add_argument("--mi-bins", dest="mi_bins", type=int)
    run_p.add_argument("--ratio", type=float, help="train fraction (default 0.8)")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out", help="output directory (default irfs-out)")
    run_p.add_argument("--plot", action="store_const", const=True, default=None,
                       help="also render SVG figures")
    run_p.set_defaults(func=_cmd_run)

    base_p = sub.add_parser("baseline", help="run a classical selection baseline")
    base_p.add_argument("--config", help="JSON config file; flags override it")
    base_p.add_argument("--data")
    base_p.add_argument("--label")
    base_p.add_argument("--method", choices=("kbest", "dtrfe", "mrmr"))
    base_p.add_argument("--k", type=int, help="features to keep (default N/2)")
    base_p.add_argument("--ratio", type=float)
    base_p.add_argument("--seed", type=int)
    base_p.add_argument("--out", help="directory for baselines.json")
    base_p.set_defaults(func=_cmd_baseline)

    rep_p = sub.add_parser("report", help="summarize a run directory and render figures")
    rep_p.add_argument("--in", dest="in_dir", required=True, help="run directory")
    rep_p.add_argument("--out", help="output directory (default: same as --in)")
    rep_p.set_defaults(func=_cmd_report)

    synth_p = sub.add_parser("synth", help="write a bundled dataset as CSV")
    synth_p.add_argument("--name", choices=("planted", "spam"), required=True)
    synth_p.add_argument("--out", required=True)
    synth_p.add_argument("--seed", type=int, default=None)
    synth_p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
