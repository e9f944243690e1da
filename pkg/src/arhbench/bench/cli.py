"""Command line entry point ``bench``."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from ..errors import ARHError
from . import catalog
from .config import check_config, load_config
from .output import write_csv, write_metadata, write_svg
from .runner import resolve_workers, run, run_metadata


def bundled_config_path(name: str) -> Path | None:
    ref = resources.files("arhbench.bench") / "configs" / f"{name}.toml"
    return Path(str(ref)) if ref.is_file() else None


def resolve_config(arg: str, full_scale: bool = False):
    """Load a config from a path, a bundled config name or a catalog id."""
    path = Path(arg)
    if path.is_file():
        return load_config(path)
    bundled = bundled_config_path(arg)
    if bundled is not None and not full_scale:
        return load_config(bundled)
    try:
        return catalog.config_for(arg, desk=not full_scale)
    except KeyError:
        raise ARHError(f"{arg!r} is neither a file, a bundled config nor a catalog scenario") from None


def _cmd_run(args) -> int:
    cfg = resolve_config(args.config, args.full_scale)
    cfg = cfg.with_overrides(
        replications=args.reps,
        seed_base=args.seed,
        out_dir=args.out,
        sample_sizes=args.n,
    )
    check_config(cfg)
    workers = resolve_workers(args.workers, cfg)
    result = run(cfg, workers=workers, timing=args.timing)
    out = Path(cfg.out_dir)
    csv_path = write_csv(result.table, out / "results.csv")
    svg_path = write_svg(result.table, out / "results.svg", cfg.threshold, title=cfg.scenario_id)
    meta_path = write_metadata(out / "run.json", run_metadata(cfg, result, workers))
    for d in result.diagnostics:
        print(f"warning: {d}", file=sys.stderr)
    for row in result.table.rows:
        f = "-" if row.f_num is None else f"{row.f_num}/{row.f_den}"
        mean = "-" if row.mean_err is None else f"{row.mean_err:.5g}"
        print(f"{row.method:<14} n={row.n:<7} k_n={row.k_n:<3} F={f:<9} mean_err={mean}")
    print(f"wrote {csv_path}, {svg_path}, {meta_path}")
    return 0


def _cmd_list(args) -> int:
    for line in catalog.catalog_lines():
        print(line)
    return 0


def _cmd_validate(args) -> int:
    cfg = resolve_config(args.config)
    for line in check_config(cfg):
        print(line)
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description="ARH(1) estimator benchmark")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a benchmark config")
    r.add_argument("--config", required=True, help="TOML file, bundled config name or catalog id")
    r.add_argument("--reps", type=int, help="override the replication count")
    r.add_argument("--workers", type=int, help="worker processes (default: config or $ARHBENCH_WORKERS)")
    r.add_argument("--seed", type=int, help="override seed_base")
    r.add_argument("--out", help="output directory")
    r.add_argument("--n", type=int, nargs="+", help="override the sample sizes")
    r.add_argument("--timing", action="store_true", help="fill the wall_ms column (breaks byte-identical output)")
    r.add_argument("--full-scale", action="store_true", help="use published sample sizes and replication count")
    r.set_defaults(func=_cmd_run)

    ls = sub.add_parser("list-scenarios", help="print the scenario catalog")
    ls.set_defaults(func=_cmd_list)

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("--config", required=True)
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ARHError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
