#!/usr/bin/env python3
"""Sweep pilot resource share for both pilot families at a fixed SNR.

The additive family spends transmit power on the pilot (payload keeps the
whole grid); the punctured family spends grid cells.  Plotting BER against
the spent fraction shows the additive curve is U-shaped while the
punctured curve keeps improving, so the two cross.

    python3 scripts/run_overhead_tradeoff.py --out-dir results [--snr 10]
"""

import argparse
import csv
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from otfs_rc.harness import config_from_dict, run_sweep

POWER_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
CELL_FRACTIONS = (0.046875, 0.125, 0.1875, 0.28, 0.39)


def base_raw(snr_db, workers, seed):
    return {
        "waveform": {"m": 64, "n": 14, "cp_len": 4, "frame_structure": "overlay",
                     "constellation": "qpsk"},
        "channel": {"mode": "dd_kernel",
                    "generator": {"n_paths": 3, "delay_spread_samples": 4,
                                  "max_doppler_hz": 555.0}},
        "pilot": {},
        "equalizer": {},
        "sim": {"snr_db_list": [snr_db], "n_frames": 6,
                "n_channel_realizations": 15, "master_seed": seed,
                "workers": workers},
    }


def run_point(raw):
    (record,) = run_sweep(config_from_dict(raw))
    return record


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--snr", type=float, default=10.0)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    os.makedirs(args.out_dir, exist_ok=True)

    rows = []
    for frac in POWER_FRACTIONS:
        raw = base_raw(args.snr, args.workers, args.seed)
        raw["pilot"] = {"scheme": "superimposed", "kind": "lattice",
                        "overhead": 0.15, "power_fraction": frac}
        raw["equalizer"] = {"kind": "rc_superimposed",
                            "rc": {"state_dim": 16, "window_len": 8,
                                   "l_forget": 8, "ridge": 1.0e-4}}
        rec = run_point(raw)
        rows.append(("additive_power", frac, rec.ber, rec.n_errors, rec.n_bits))
        print(f"additive power_fraction={frac:.3f} ber={rec.ber:.4f}", flush=True)
    for frac in CELL_FRACTIONS:
        raw = base_raw(args.snr, args.workers, args.seed)
        raw["pilot"] = {"scheme": "interleaved", "kind": "lattice",
                        "overhead": frac}
        raw["equalizer"] = {"kind": "rc_interleaved",
                            "rc": {"state_dim": 8, "window_len": 2,
                                   "l_forget": 4, "ridge": 1.0e-3}}
        rec = run_point(raw)
        rows.append(("punctured_cells", frac, rec.ber, rec.n_errors, rec.n_bits))
        print(f"punctured overhead={frac:.3f} ber={rec.ber:.4f}", flush=True)

    csv_path = os.path.join(args.out_dir, "overhead_tradeoff.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("family", "resource_fraction", "ber", "n_errors", "n_bits"))
        writer.writerows(rows)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for family, label in (("additive_power", "additive pilot (power share)"),
                          ("punctured_cells", "punctured pilot (cell share)")):
        pts = [(f, b) for fam, f, b, _, _ in rows if fam == family]
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    ax.set_xlabel("pilot resource fraction")
    ax.set_ylabel(f"BER at {args.snr:g} dB")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    svg_path = os.path.join(args.out_dir, "overhead_tradeoff.svg")
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    print(f"wrote {csv_path} and {svg_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
