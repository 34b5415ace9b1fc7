"""Command line entry point.

``otfs-rc run config.yaml --out results.csv --plot curves.svg`` executes
the sweep described by the config and writes the requested artifacts.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import ConfigError, emit_plot, load_config, run_sweep, write_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otfs-rc",
                                     description="link-level OTFS equalizer experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a Monte-Carlo sweep from a YAML config")
    run.add_argument("config", help="path to the experiment config")
    run.add_argument("--out", help="write aggregated results to this CSV path")
    run.add_argument("--plot", help="write a BER-vs-SNR SVG to this path")
    run.add_argument("--seed", type=int, help="override sim.master_seed")
    run.add_argument("--workers", type=int, help="override sim.workers")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        sim = cfg.sim
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            sim = replace(sim, master_seed=args.seed)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be at least 1")
            sim = replace(sim, workers=args.workers)
        cfg = replace(cfg, sim=sim)
        records = run_sweep(cfg)
        if args.out:
            write_csv(records, args.out)
        if args.plot:
            emit_plot(records, args.plot)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for r in records:
        print(f"{r.equalizer} scheme={r.scheme} snr={r.snr_db:g} dB "
              f"doppler={r.doppler_hz:g} Hz ber={r.ber:.3e} "
              f"({r.n_errors}/{r.n_bits} bits, {r.n_frames} frames)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
