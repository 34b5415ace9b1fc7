#!/usr/bin/env python3
"""Run the headline BER-vs-SNR comparison and plot every curve together.

Executes the four desk-scale configs (additive-pilot reservoir, punctured
pilots with 1 and 7 reservoirs, classical LMMSE baseline) plus the genie
MMSE bound, merges the results into one CSV and one SVG.

    python3 scripts/run_ber_curves.py --out-dir results [--quick] [--workers 4]
"""

import argparse
import os
import sys
from dataclasses import replace

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from otfs_rc.harness import emit_plot, load_config, run_sweep, write_csv

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")
CONFIGS = (
    "ber_superimposed.yaml",
    "ber_interleaved_k1.yaml",
    "ber_interleaved_k7.yaml",
    "ber_tf_lmmse.yaml",
    "ber_dd_mmse_genie.yaml",
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--quick", action="store_true",
                        help="cut to 5 realizations x 4 frames for a fast look")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    os.makedirs(args.out_dir, exist_ok=True)
    records = []
    for name in CONFIGS:
        cfg = load_config(os.path.join(CONFIG_DIR, name))
        sim = cfg.sim
        if args.quick:
            sim = replace(sim, n_channel_realizations=5, n_frames=4)
        if args.workers is not None:
            sim = replace(sim, workers=args.workers)
        if args.seed is not None:
            sim = replace(sim, master_seed=args.seed)
        cfg = replace(cfg, sim=sim)
        print(f"running {name} ...", flush=True)
        recs = run_sweep(cfg)
        records.extend(recs)
        for r in recs:
            print(f"  {r.equalizer} snr={r.snr_db:g} ber={r.ber:.3e}")
    csv_path = os.path.join(args.out_dir, "ber_curves.csv")
    svg_path = os.path.join(args.out_dir, "ber_curves.svg")
    write_csv(records, csv_path)
    emit_plot(records, svg_path)
    print(f"wrote {csv_path} and {svg_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
