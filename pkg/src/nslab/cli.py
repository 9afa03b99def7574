"""``nslab`` command-line entry point.

Each command writes ``<out>/<command>/<tag or timestamp>/`` containing the
data file and a copy of the effective configuration. CSV files start with a
``#`` provenance line carrying the config hash and seed.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as ex

COMMANDS = ("convergence", "doppler-sweep", "quantization-sweep", "unit-bench")


def rows_to_csv(rows: list[dict], command: str, cfg: ex.ExperimentConfig, seed: int) -> str:
    buf = io.StringIO()
    buf.write(f"# nslab {command} seed={seed} config_sha256={cfg.sha256()}\n")
    if rows:
        cols = list(rows[0])
        for r in rows[1:]:
            cols += [k for k in r if k not in cols]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def run_command(command: str, cfg: ex.ExperimentConfig, seed: int) -> tuple[str, str]:
    """Run ``command`` and return ``(file name, file contents)``."""
    if command == "convergence":
        rows = ex.convergence_campaign(cfg, seed)
        return "data.csv", rows_to_csv(rows, command, cfg, seed)
    if command == "doppler-sweep":
        rows = ex.doppler_sweep(cfg, seed, "ps") + ex.doppler_sweep(cfg, seed, "pp")
        return "data.csv", rows_to_csv(rows, command, cfg, seed)
    if command == "quantization-sweep":
        rows = ex.quantization_sweep(cfg, seed)
        return "data.csv", rows_to_csv(rows, command, cfg, seed)
    if command == "unit-bench":
        summary = ex.unit_bench(cfg, seed)
        summary["config_sha256"] = cfg.sha256()
        return "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown command {command!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nslab", description="One-bit null-space learning experiments")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="JSON config with sections "
                   "geometry/channels/feedback/learning/sweep")
    p.add_argument("--seed", type=int, default=0, help="root seed (u64)")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per cell")
    p.add_argument("--eta", type=float, help="line-search accuracy in radians")
    p.add_argument("--out", type=Path, default=Path("results"), help="output root directory")
    p.add_argument("--tag", help="run directory name (default: UTC timestamp)")
    p.add_argument("--workers", type=int, help="parallel trial processes")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if not 0 <= args.seed < 2**64:
        print("nslab: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    cfg = ex.ExperimentConfig.load(args.config) if args.config else ex.ExperimentConfig()
    if args.trials is not None:
        cfg.sweep.trials = args.trials
    if args.workers is not None:
        cfg.sweep.workers = args.workers
    if args.eta is not None:
        cfg.learning.eta = args.eta
        cfg.sweep.eta = [args.eta]
    tag = args.tag or _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    run_dir = args.out / args.command / tag
    run_dir.mkdir(parents=True, exist_ok=True)
    name, text = run_command(args.command, cfg, args.seed)
    (run_dir / name).write_text(text)
    (run_dir / "config.json").write_text(cfg.to_json() + "\n")
    print(run_dir / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
