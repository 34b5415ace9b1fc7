"""Monte-Carlo BER harness: config tree, sweep runner, CSV and plot output.

Determinism contract: every Monte-Carlo task (one frame at one sweep
point) derives its RNG purely from the master seed and the task's
indices, and results are reduced in task order.  The output CSV is
therefore byte-identical for any worker count.
"""

from __future__ import annotations

import copy
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from . import channel as ch
from .ddcore import Constellation, WaveformConfig, get_constellation, map_bits, modulate, demodulate
from .equalizers import (
    DD_MMSE_PERFECT_CSI,
    EQUALIZER_KINDS,
    RC_INTERLEAVED,
    RC_SUPERIMPOSED,
    TF_LMMSE_ESTIMATED,
    EqualizerSpec,
    data_bits,
    equalize_frame,
)
from .esn import ReservoirConfig
from .pilots import (
    INTERLEAVED,
    PATTERN_KINDS,
    SUPERIMPOSED,
    build_interleaved,
    build_superimposed,
    extract_datasets,
    make_pattern,
    superimposed_pilot_phases,
)


class ConfigError(ValueError):
    """Raised for malformed experiment configs; message carries the key path."""


# ---------------------------------------------------------------------------
# config tree

@dataclass(frozen=True)
class MimoSection:
    n_t: int = 1
    n_r: int = 1


@dataclass(frozen=True)
class ChannelSection:
    mode: str = "dd_kernel"  # dd_kernel | tdl
    generator: ch.ChannelGenerator | None = None
    paths: ch.PathList | None = None
    mimo: MimoSection = field(default_factory=MimoSection)


@dataclass(frozen=True)
class PilotSection:
    scheme: str = INTERLEAVED
    kind: str = "staircase"
    overhead: float = 0.046875
    power_fraction: float = 0.5
    pilot_seed: int = 0


@dataclass(frozen=True)
class RcSettings:
    state_dim: int = 8
    window_len: int = 20
    spectral_radius: float = 0.9
    input_scale: float = 0.05
    ridge: float = 1e-4
    l_forget: int | None = None  # None -> cp_len
    seed: int = 0


@dataclass(frozen=True)
class EqualizerSection:
    kind: str = RC_SUPERIMPOSED
    k_rc: int = 1
    rc: RcSettings = field(default_factory=RcSettings)


@dataclass(frozen=True)
class SimSection:
    snr_db_list: tuple = (10.0,)
    doppler_hz_list: tuple | None = None
    n_frames: int = 20
    n_channel_realizations: int = 1
    master_seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    waveform: WaveformConfig
    constellation: Constellation
    channel: ChannelSection
    pilot: PilotSection
    equalizer: EqualizerSection
    sim: SimSection


@dataclass(frozen=True)
class ResultRecord:
    """One aggregated sweep cell; fields match the CSV columns exactly."""

    scheme: str
    equalizer: str
    snr_db: float
    doppler_hz: float
    k_rc: int
    overhead: float
    n_t: int
    n_r: int
    n_frames: int
    n_bits: int
    n_errors: int
    ber: float
    mean_train_loss: float
    seed: int


CSV_COLUMNS = (
    "scheme", "equalizer", "snr_db", "doppler_hz", "k_rc", "overhead",
    "n_t", "n_r", "n_frames", "n_bits", "n_errors", "ber",
    "mean_train_loss", "seed",
)


# ---------------------------------------------------------------------------
# config loading

def _expect_mapping(node, path: str) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    return node


def _pop(node: dict, key: str, path: str, default=None, required=False):
    if key in node:
        return node.pop(key)
    if required:
        raise ConfigError(f"{path}.{key}: missing required key")
    return default


def _as_int(value, path: str, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _reject_unknown(node: dict, path: str):
    if node:
        raise ConfigError(f"{path}: unknown key(s) {sorted(node)}")


def _load_waveform(node, path):
    node = _expect_mapping(node, path)
    m = _as_int(_pop(node, "m", path, required=True), f"{path}.m", 1)
    n = _as_int(_pop(node, "n", path, required=True), f"{path}.n", 1)
    delta_f = _as_float(_pop(node, "delta_f", path, 15e3), f"{path}.delta_f")
    cp_len = _as_int(_pop(node, "cp_len", path, 0), f"{path}.cp_len", 0)
    structure = _pop(node, "frame_structure", path, "standalone")
    const_name = _pop(node, "constellation", path, "qpsk")
    _reject_unknown(node, path)
    try:
        wf = WaveformConfig(m=m, n=n, delta_f=delta_f, cp_len=cp_len, frame_structure=structure)
        constellation = get_constellation(str(const_name))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return wf, constellation


def _load_channel(node, path):
    node = _expect_mapping(node, path)
    mode = _pop(node, "mode", path, "dd_kernel")
    if mode not in ("dd_kernel", "tdl"):
        raise ConfigError(f"{path}.mode: expected dd_kernel or tdl, got {mode!r}")
    gen_node = _pop(node, "generator", path)
    paths_node = _pop(node, "paths", path)
    mimo_node = _expect_mapping(_pop(node, "mimo", path), f"{path}.mimo")
    n_t = _as_int(_pop(mimo_node, "n_t", f"{path}.mimo", 1), f"{path}.mimo.n_t", 1)
    n_r = _as_int(_pop(mimo_node, "n_r", f"{path}.mimo", 1), f"{path}.mimo.n_r", 1)
    _reject_unknown(mimo_node, f"{path}.mimo")
    _reject_unknown(node, path)
    if (gen_node is None) == (paths_node is None):
        raise ConfigError(f"{path}: exactly one of 'generator' or 'paths' is required")
    generator = None
    paths = None
    if gen_node is not None:
        gen_node = _expect_mapping(gen_node, f"{path}.generator")
        gp = f"{path}.generator"
        kwargs = dict(
            n_paths=_as_int(_pop(gen_node, "n_paths", gp, 6), f"{gp}.n_paths", 1),
            delay_spread_samples=_as_int(
                _pop(gen_node, "delay_spread_samples", gp, 4), f"{gp}.delay_spread_samples", 0),
            max_doppler_hz=_as_float(_pop(gen_node, "max_doppler_hz", gp, 555.0), f"{gp}.max_doppler_hz"),
            profile=str(_pop(gen_node, "profile", gp, "exponential")),
        )
        _reject_unknown(gen_node, gp)
        try:
            generator = ch.ChannelGenerator(**kwargs)
        except ValueError as exc:
            raise ConfigError(f"{gp}: {exc}") from None
    else:
        if not isinstance(paths_node, list) or not paths_node:
            raise ConfigError(f"{path}.paths: expected a non-empty list")
        if n_t != 1 or n_r != 1:
            raise ConfigError(f"{path}.paths: explicit paths support single-antenna runs only")
        entries = []
        for i, item in enumerate(paths_node):
            ip = f"{path}.paths[{i}]"
            item = _expect_mapping(item, ip)
            delay = _as_int(_pop(item, "delay_samples", ip, required=True), f"{ip}.delay_samples", 0)
            dop = _as_float(_pop(item, "doppler_hz", ip, 0.0), f"{ip}.doppler_hz")
            gain = _pop(item, "gain", ip, [1.0, 0.0])
            if not (isinstance(gain, list) and len(gain) == 2):
                raise ConfigError(f"{ip}.gain: expected [real, imag]")
            _reject_unknown(item, ip)
            entries.append(ch.Path(delay, dop, complex(_as_float(gain[0], f"{ip}.gain[0]"),
                                                       _as_float(gain[1], f"{ip}.gain[1]"))))
        paths = ch.PathList(tuple(entries), max_doppler_hz=max(abs(p.doppler_hz) for p in entries))
    return ChannelSection(mode=mode, generator=generator, paths=paths,
                          mimo=MimoSection(n_t=n_t, n_r=n_r))


def _load_pilot(node, path):
    node = _expect_mapping(node, path)
    scheme = _pop(node, "scheme", path, INTERLEAVED)
    if scheme not in (INTERLEAVED, SUPERIMPOSED):
        raise ConfigError(f"{path}.scheme: expected interleaved or superimposed, got {scheme!r}")
    kind = _pop(node, "kind", path, "staircase")
    if kind not in PATTERN_KINDS:
        raise ConfigError(f"{path}.kind: expected one of {PATTERN_KINDS}, got {kind!r}")
    over = _as_float(_pop(node, "overhead", path, 0.046875), f"{path}.overhead")
    if not 0.0 < over < 1.0:
        raise ConfigError(f"{path}.overhead: must lie in (0, 1), got {over}")
    frac = _as_float(_pop(node, "power_fraction", path, 0.5), f"{path}.power_fraction")
    if not 0.0 < frac < 1.0:
        raise ConfigError(f"{path}.power_fraction: must lie in (0, 1), got {frac}")
    seed = _as_int(_pop(node, "pilot_seed", path, 0), f"{path}.pilot_seed", 0)
    _reject_unknown(node, path)
    return PilotSection(scheme=scheme, kind=kind, overhead=over,
                        power_fraction=frac, pilot_seed=seed)


def _load_equalizer(node, path):
    node = _expect_mapping(node, path)
    kind = _pop(node, "kind", path, required=True)
    if kind not in EQUALIZER_KINDS:
        raise ConfigError(f"{path}.kind: expected one of {EQUALIZER_KINDS}, got {kind!r}")
    k_rc = _as_int(_pop(node, "k_rc", path, 1), f"{path}.k_rc", 1)
    rc_node = _expect_mapping(_pop(node, "rc", path), f"{path}.rc")
    rp = f"{path}.rc"
    l_forget = _pop(rc_node, "l_forget", rp)
    if l_forget is not None:
        l_forget = _as_int(l_forget, f"{rp}.l_forget", 0)
    rc = RcSettings(
        state_dim=_as_int(_pop(rc_node, "state_dim", rp, 8), f"{rp}.state_dim", 1),
        window_len=_as_int(_pop(rc_node, "window_len", rp, 20), f"{rp}.window_len", 1),
        spectral_radius=_as_float(_pop(rc_node, "spectral_radius", rp, 0.9), f"{rp}.spectral_radius"),
        input_scale=_as_float(_pop(rc_node, "input_scale", rp, 0.05), f"{rp}.input_scale"),
        ridge=_as_float(_pop(rc_node, "ridge", rp, 1e-4), f"{rp}.ridge"),
        l_forget=l_forget,
        seed=_as_int(_pop(rc_node, "seed", rp, 0), f"{rp}.seed", 0),
    )
    _reject_unknown(rc_node, rp)
    _reject_unknown(node, path)
    return EqualizerSection(kind=kind, k_rc=k_rc, rc=rc)


def _load_sim(node, path):
    node = _expect_mapping(node, path)
    snr_raw = _pop(node, "snr_db_list", path, required=True)
    if not isinstance(snr_raw, list) or not snr_raw:
        raise ConfigError(f"{path}.snr_db_list: expected a non-empty list")
    snrs = tuple(_as_float(v, f"{path}.snr_db_list[{i}]") for i, v in enumerate(snr_raw))
    dop_raw = _pop(node, "doppler_hz_list", path)
    dops = None
    if dop_raw is not None:
        if not isinstance(dop_raw, list) or not dop_raw:
            raise ConfigError(f"{path}.doppler_hz_list: expected a non-empty list")
        dops = tuple(_as_float(v, f"{path}.doppler_hz_list[{i}]") for i, v in enumerate(dop_raw))
    sim = SimSection(
        snr_db_list=snrs,
        doppler_hz_list=dops,
        n_frames=_as_int(_pop(node, "n_frames", path, 20), f"{path}.n_frames", 1),
        n_channel_realizations=_as_int(
            _pop(node, "n_channel_realizations", path, 1), f"{path}.n_channel_realizations", 1),
        master_seed=_as_int(_pop(node, "master_seed", path, 0), f"{path}.master_seed", 0),
        workers=_as_int(_pop(node, "workers", path, 1), f"{path}.workers", 1),
    )
    _reject_unknown(node, path)
    return sim


_SCHEME_FOR_KIND = {
    RC_INTERLEAVED: INTERLEAVED,
    RC_SUPERIMPOSED: SUPERIMPOSED,
    TF_LMMSE_ESTIMATED: SUPERIMPOSED,
}


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = _expect_mapping(raw, "<root>")
    # loaders consume keys by popping; never mutate the caller's tree
    raw = copy.deepcopy(raw)
    waveform, constellation = _load_waveform(_pop(raw, "waveform", "<root>", required=True), "waveform")
    channel = _load_channel(_pop(raw, "channel", "<root>", required=True), "channel")
    pilot = _load_pilot(_pop(raw, "pilot", "<root>", {}), "pilot")
    equalizer = _load_equalizer(_pop(raw, "equalizer", "<root>", required=True), "equalizer")
    sim = _load_sim(_pop(raw, "sim", "<root>", required=True), "sim")
    _reject_unknown(raw, "<root>")

    needed = _SCHEME_FOR_KIND.get(equalizer.kind)
    if needed and pilot.scheme != needed:
        raise ConfigError(f"equalizer.kind {equalizer.kind} requires pilot.scheme {needed}")
    if equalizer.kind == RC_INTERLEAVED and equalizer.k_rc > 1 and pilot.kind != "block_rows":
        raise ConfigError("equalizer.k_rc > 1 with interleaved pilots requires pilot.kind block_rows")
    if channel.mode == "tdl":
        max_delay = (channel.generator.delay_spread_samples if channel.generator
                     else channel.paths.max_delay)
        if max_delay > waveform.cp_len:
            raise ConfigError(
                f"channel: tdl mode needs waveform.cp_len >= the maximum path delay ({max_delay})")
    if channel.paths is not None and sim.doppler_hz_list is not None:
        raise ConfigError("sim.doppler_hz_list cannot be swept with explicit channel.paths")
    # pattern construction can fail for extreme targets; surface that at load time
    try:
        make_pattern(pilot.kind, waveform.m, waveform.n, pilot.overhead, seed=pilot.pilot_seed)
    except ValueError as exc:
        raise ConfigError(f"pilot: {exc}") from None
    return ExperimentConfig(waveform=waveform, constellation=constellation,
                            channel=channel, pilot=pilot, equalizer=equalizer, sim=sim)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# sweep execution

def _doppler_points(cfg: ExperimentConfig) -> tuple:
    if cfg.sim.doppler_hz_list is not None:
        return cfg.sim.doppler_hz_list
    if cfg.channel.generator is not None:
        return (cfg.channel.generator.max_doppler_hz,)
    return (cfg.channel.paths.max_doppler_hz,)


def _draw_links(cfg: ExperimentConfig, doppler_hz: float, i_dop: int, i_real: int):
    """Channel realisation for one (doppler, realization) cell.

    Shared across SNR points and frames so curves are comparable along
    the SNR axis; deterministic in the master seed and cell indices.
    """
    mimo = cfg.channel.mimo
    if cfg.channel.paths is not None:
        return ((cfg.channel.paths,),)
    gen = replace(cfg.channel.generator, max_doppler_hz=doppler_hz)
    rng = np.random.default_rng([cfg.sim.master_seed, 101, i_dop, i_real])
    return tuple(tuple(gen.draw(rng) for _ in range(mimo.n_t)) for _ in range(mimo.n_r))


def _resolved_equalizer_spec(cfg: ExperimentConfig) -> EqualizerSpec:
    rc = cfg.equalizer.rc
    l_forget = rc.l_forget if rc.l_forget is not None else cfg.waveform.cp_len
    rc_cfg = ReservoirConfig(
        state_dim=rc.state_dim, input_dim=1, window_len=rc.window_len,
        spectral_radius=rc.spectral_radius, input_scale=rc.input_scale,
        ridge=rc.ridge, l_forget=l_forget, seed=rc.seed,
    )
    return EqualizerSpec(kind=cfg.equalizer.kind, k_rc=cfg.equalizer.k_rc, rc=rc_cfg)


def _run_task(args) -> tuple:
    """One frame at one sweep point; returns (i_snr, i_dop, errors, bits, loss)."""
    cfg, i_snr, i_dop, i_real, i_frame = args
    wf = cfg.waveform
    const = cfg.constellation
    mimo = cfg.channel.mimo
    snr_db = cfg.sim.snr_db_list[i_snr]
    doppler_hz = _doppler_points(cfg)[i_dop]
    links = _draw_links(cfg, doppler_hz, i_dop, i_real)
    rng = np.random.default_rng([cfg.sim.master_seed, 202, i_snr, i_dop, i_real, i_frame])

    pattern = make_pattern(cfg.pilot.kind, wf.m, wf.n, cfg.pilot.overhead,
                           seed=cfg.pilot.pilot_seed)
    bps = const.bits_per_symbol
    tx_frames, truth_blocks, true_bits = [], [], []
    scales, phases = [], []
    if cfg.pilot.scheme == INTERLEAVED:
        n_data = wf.m * wf.n - pattern.n_pilot_cells
        for ant in range(mimo.n_t):
            bits = rng.integers(0, 2, n_data * bps)
            frame = build_interleaved(bits, pattern, const, cfg.pilot.pilot_seed, antenna=ant)
            tx_frames.append(frame)
            truth_blocks.append(frame * ~pattern.mask)
            true_bits.append(bits)
    else:
        for ant in range(mimo.n_t):
            bits = rng.integers(0, 2, wf.m * wf.n * bps)
            data_frame = map_bits(bits, const).reshape(wf.m, wf.n)
            # pseudo-random unit-modulus pilots: a constant pilot level
            # concentrates its energy on a few delay rows and starves the
            # readout regression of excitation
            ph = superimposed_pilot_phases(pattern, cfg.pilot.pilot_seed, ant)
            frame, scale = build_superimposed(data_frame, pattern,
                                              cfg.pilot.power_fraction, pilot_phases=ph)
            tx_frames.append(frame)
            truth_blocks.append(data_frame)
            true_bits.append(bits)
            scales.append(scale)
            phases.append(ph)

    if cfg.channel.mode == "dd_kernel":
        kernels = tuple(tuple(ch.kernel_from_paths(links[r][t], wf)
                              for t in range(mimo.n_t)) for r in range(mimo.n_r))
        clean = [sum(ch.apply_dd_kernel(tx_frames[t], kernels[r][t])
                     for t in range(mimo.n_t)) for r in range(mimo.n_r)]
        genie_kernel = kernels[0][0]
    else:
        streams = [modulate(f, wf) for f in tx_frames]
        t0 = -wf.cp_len / wf.sample_rate
        clean_streams = [sum(ch.apply_tdl(streams[t], links[r][t], wf.sample_rate, t0)
                             for t in range(mimo.n_t)) for r in range(mimo.n_r)]
        genie_kernel = ch.kernel_from_paths(links[0][0], wf)
        clean = clean_streams

    stacked_clean = np.stack(clean)
    noise_var = ch.noise_variance(stacked_clean, snr_db)
    noisy = ch.add_awgn(stacked_clean, snr_db, rng)
    if cfg.channel.mode == "dd_kernel":
        received = [noisy[r] for r in range(mimo.n_r)]
    else:
        received = [demodulate(noisy[r], wf) for r in range(mimo.n_r)]

    x_test = np.vstack(truth_blocks)
    if cfg.pilot.scheme == INTERLEAVED:
        dataset = extract_datasets(received, INTERLEAVED, pattern, constellation=const,
                                   pilot_seed=cfg.pilot.pilot_seed, x_test=x_test,
                                   n_t=mimo.n_t, noise_var=noise_var)
    else:
        dataset = extract_datasets(received, SUPERIMPOSED, pattern,
                                   pilot_scale=scales, pilot_phases=phases,
                                   x_test=x_test, n_t=mimo.n_t, noise_var=noise_var)

    spec = _resolved_equalizer_spec(cfg)
    result = equalize_frame(spec, dataset, const, kernel=genie_kernel, noise_var=noise_var)
    got_bits = data_bits(result.detected, const, pattern, cfg.pilot.scheme, n_t=mimo.n_t)
    want_bits = np.concatenate(true_bits)
    errors = int(np.count_nonzero(got_bits != want_bits))
    loss = float(result.diagnostics.get("train_loss", 0.0))
    return i_snr, i_dop, errors, want_bits.size, loss


def run_sweep(cfg: ExperimentConfig) -> list:
    """Run the full sweep and aggregate one record per (snr, doppler) cell."""
    dops = _doppler_points(cfg)
    sim = cfg.sim
    tasks = [
        (cfg, i_s, i_d, i_r, i_f)
        for i_s in range(len(sim.snr_db_list))
        for i_d in range(len(dops))
        for i_r in range(sim.n_channel_realizations)
        for i_f in range(sim.n_frames)
    ]
    if sim.workers > 1:
        with ProcessPoolExecutor(max_workers=sim.workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=8))
    else:
        results = [_run_task(t) for t in tasks]

    frames_per_cell = sim.n_channel_realizations * sim.n_frames
    agg: dict = {}
    for (i_s, i_d, errors, bits, loss) in results:
        cell = agg.setdefault((i_s, i_d), [0, 0, 0.0])
        cell[0] += errors
        cell[1] += bits
        cell[2] += loss

    pattern = make_pattern(cfg.pilot.kind, cfg.waveform.m, cfg.waveform.n,
                           cfg.pilot.overhead, seed=cfg.pilot.pilot_seed)
    records = []
    for i_s in range(len(sim.snr_db_list)):
        for i_d in range(len(dops)):
            errors, bits, loss_sum = agg[(i_s, i_d)]
            records.append(ResultRecord(
                scheme=cfg.pilot.scheme,
                equalizer=cfg.equalizer.kind,
                snr_db=float(sim.snr_db_list[i_s]),
                doppler_hz=float(dops[i_d]),
                k_rc=cfg.equalizer.k_rc,
                overhead=pattern.overhead,
                n_t=cfg.channel.mimo.n_t,
                n_r=cfg.channel.mimo.n_r,
                n_frames=frames_per_cell,
                n_bits=bits,
                n_errors=errors,
                ber=errors / bits,
                mean_train_loss=loss_sum / frames_per_cell,
                seed=sim.master_seed,
            ))
    return records


# ---------------------------------------------------------------------------
# output

def write_csv(records, path: str) -> None:
    """Write records with a fixed column set and '.'-decimal float repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.scheme, r.equalizer, repr(r.snr_db), repr(r.doppler_hz),
                r.k_rc, repr(r.overhead), r.n_t, r.n_r, r.n_frames,
                r.n_bits, r.n_errors, repr(r.ber), repr(r.mean_train_loss), r.seed,
            ])


def read_csv(path: str) -> list:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        records = []
        for row in reader:
            records.append(ResultRecord(
                scheme=row[0], equalizer=row[1], snr_db=float(row[2]),
                doppler_hz=float(row[3]), k_rc=int(row[4]), overhead=float(row[5]),
                n_t=int(row[6]), n_r=int(row[7]), n_frames=int(row[8]),
                n_bits=int(row[9]), n_errors=int(row[10]), ber=float(row[11]),
                mean_train_loss=float(row[12]), seed=int(row[13]),
            ))
    return records


def emit_plot(records, path: str) -> None:
    """Log-scale BER versus SNR, one series per equalizer/scheme combination."""
    if not records:
        raise ValueError("no records to plot")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series: dict = {}
    for r in records:
        key = (r.equalizer, r.scheme, r.k_rc, r.doppler_hz)
        series.setdefault(key, []).append((r.snr_db, r.ber))
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for (eq, scheme, k_rc, dop), pts in sorted(series.items()):
        pts.sort()
        snr = np.array([p[0] for p in pts])
        vals = np.array([p[1] for p in pts], dtype=float)
        vals[vals == 0.0] = np.nan  # zero errors cannot sit on a log axis
        label = f"{eq} ({scheme}, k={k_rc}, {dop:g} Hz)"
        ax.semilogy(snr, vals, marker="o", label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
