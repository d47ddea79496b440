"""Command-line entry points: gen, run, ablate, report, serve.

Exit codes: 0 ok, 1 runtime error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

from .config import (
    ConfigError,
    RunConfig,
    SyntheticSpec,
    ablation_sizes,
    load_config,
)
from .loop import RunLog, fully_supervised_eer, run_simulated
from .policy import COMBO_NAMES
from .pool import PoolError, generate_synthetic, load_pool, split_train_test
from .report import ReportError, ReportTable, check_same_pool, table_from_runs

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _write_pool(pool, out_dir: str, name: str):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["id"] + [f"f{i}" for i in range(pool.d)] + ["truth"]
        )
        for item in pool.items:
            writer.writerow(
                [item.id]
                + [repr(float(v)) for v in item.features]
                + ["" if item.truth is None else item.truth]
            )
    manifest = {**pool.manifest, "csv": f"{name}.csv"}
    manifest_path = os.path.join(out_dir, f"{name}.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def cmd_gen(args) -> int:
    try:
        pool = generate_synthetic(
            n=args.n,
            d=args.dim,
            pos_fraction=args.pos_frac,
            separation=args.sep,
            seed=args.seed,
        )
    except PoolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    manifest_path = _write_pool(pool, args.out, args.name)
    n_pos = int(pool.truths().sum())
    print(f"wrote {manifest_path}: {pool.n} items, d={pool.d}, {n_pos} positives")
    return 0


def _build_pools(config: RunConfig):
    if config.pool.manifest is not None:
        pool = load_pool(config.pool.manifest)
    else:
        syn = config.pool.synthetic
        pool = generate_synthetic(
            syn.n, syn.d, syn.pos_fraction, syn.separation, syn.seed
        )
    return split_train_test(pool, config.seed)


def cmd_run(args) -> int:
    try:
        config = load_config(args.config, seed_override=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    train, test = _build_pools(config)
    log = run_simulated(train, test, config)
    log.save(args.out, include_timing=args.timing)
    final = log.records[-1]
    eer_txt = "n/a" if final.test_eer is None else f"{final.test_eer * 100:.2f}%"
    print(
        f"wrote {args.out}: {len(log.records)} iterations, "
        f"samp {final.samp_pct:.2f}%, final EER {eer_txt}"
    )
    return 0


def _ablate_config(base: RunConfig, strategy, combo, size, seed) -> RunConfig:
    display = dataclasses.replace(
        base.display, initial=size, max_size=max(base.display.max_size, size)
    )
    return dataclasses.replace(
        base, strategy=strategy, combo=combo, display=display, seed=seed
    )


def cmd_ablate(args) -> int:
    try:
        config = load_config(args.config)
        with open(args.config, encoding="utf-8") as fh:
            sizes = ablation_sizes(json.load(fh))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    seeds = list(range(args.seeds))
    table = ReportTable()
    train_size = None
    for size in sizes:
        rows: dict[str, list[RunLog]] = {}
        for combo in COMBO_NAMES:
            rows[combo] = []
            for seed in seeds:
                cfg = _ablate_config(config, "fixed-combo", combo, size, seed)
                train, test = _build_pools(cfg)
                train_size = train.n
                rows[combo].append(run_simulated(train, test, cfg))
        rows["rl-fixed"] = []
        rows["rl-adaptive"] = []
        for seed in seeds:
            cfg = _ablate_config(config, "rl-fixed-size", None, size, seed)
            train, test = _build_pools(cfg)
            rows["rl-fixed"].append(run_simulated(train, test, cfg))
            cfg = _ablate_config(config, "rl-adaptive", None, size, seed)
            train, test = _build_pools(cfg)
            rows["rl-adaptive"].append(run_simulated(train, test, cfg))
        table.blocks.append(
            table_from_runs(f"display size = {size}", rows, train_size)
        )
    text = table.render_text()
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    csv_out = os.path.splitext(args.out)[0] + ".csv"
    with open(csv_out, "w", encoding="utf-8") as fh:
        fh.write(table.render_csv())
    print(text)
    print(f"wrote {args.out} and {csv_out}")
    return 0


def cmd_report(args) -> int:
    if not args.runs:
        print("error: no run logs given", file=sys.stderr)
        return USAGE_ERROR
    logs = [RunLog.load(path) for path in args.runs]
    try:
        check_same_pool(logs)
    except ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    rows: dict[str, list[RunLog]] = {}
    for log in logs:
        name = log.meta.get("strategy", "run")
        if log.meta.get("config", {}).get("combo"):
            name = f"fixed:{log.meta['config']['combo']}"
        rows.setdefault(name, []).append(log)
    train_size = logs[0].meta["train_size"]
    block = table_from_runs("strategies", rows, train_size)

    # reference row: the same pool fully labeled, trained in one shot
    from .config import config_from_dict

    cfg = config_from_dict(logs[0].meta["config"])
    if cfg.pool.manifest is None or not cfg.pool.manifest.startswith("<registered"):
        try:
            train, test = _build_pools(cfg)
            ref = fully_supervised_eer(train, test, cfg.classifier) * 100.0
            block.rows.append(
                ("fully-supervised", [ref] * len(block.iterations))
            )
        except (PoolError, FileNotFoundError) as exc:
            print(f"note: skipping fully-supervised row ({exc})", file=sys.stderr)

    table = ReportTable(blocks=[block])
    text = table.render_text()
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    csv_out = os.path.splitext(args.out)[0] + ".csv"
    with open(csv_out, "w", encoding="utf-8") as fh:
        fh.write(table.render_csv())
    print(text)
    print(f"wrote {args.out} and {csv_out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(state_dir=args.state_dir, frontend_dir=args.frontend)
    if args.pool:
        store = app.state.store
        pool = load_pool(args.pool)
        pool_id = store.add_pool(pool)
        print(f"registered pool {pool_id} from {args.pool}")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"server error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aldisplay",
        description="Frugal active-learning display selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = SyntheticSpec()

    p = sub.add_parser("gen", help="generate a synthetic pool")
    p.add_argument("--n", type=int, default=defaults.n)
    p.add_argument("--dim", type=int, default=defaults.d)
    p.add_argument("--pos-frac", type=float, default=defaults.pos_fraction)
    p.add_argument("--sep", type=float, default=defaults.separation)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--out", default=".")
    p.add_argument("--name", default="pool")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="simulated run from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--timing", action="store_true",
        help="include wall times (breaks byte-reproducibility)",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ablate", help="criterion/strategy ablation grid")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="compare strategies across run logs")
    p.add_argument("--runs", nargs="+", default=[])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the labeling service")
    p.add_argument("--pool", default=None, help="manifest to preload")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--state-dir", default=None)
    p.add_argument("--frontend", default=None, help="built UI directory to mount")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, PoolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
