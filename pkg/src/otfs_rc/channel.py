"""Doubly-dispersive channels: delay-Doppler kernels, tapped delay lines, AWGN.

Two channel modes are provided and kept deliberately distinct:

* ``dd_kernel``: the ideal-pulse model.  The channel is a 2-D circular
  convolution of the delay-Doppler frame with a kernel, diagonal in the
  2-D DFT domain.
* ``tdl``: a per-sample tapped delay line applied to the modulated
  waveform.  This includes the rectangular-pulse artefacts the kernel
  model idealises away; the mismatch between the two modes is measured
  and regression-tested rather than hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ddcore import WaveformConfig


@dataclass(frozen=True)
class Path:
    """One propagation path: integer sample delay, Doppler shift, complex gain."""

    delay_samples: int
    doppler_hz: float
    gain: complex

    def __post_init__(self):
        if self.delay_samples < 0 or int(self.delay_samples) != self.delay_samples:
            raise ValueError(f"delay_samples must be a non-negative integer, got {self.delay_samples}")


@dataclass(frozen=True)
class PathList:
    """A set of paths plus the Doppler bound they were drawn under."""

    paths: tuple
    max_doppler_hz: float = 0.0

    def __post_init__(self):
        if not self.paths:
            raise ValueError("path list must not be empty")
        bound = abs(self.max_doppler_hz) + 1e-9
        for p in self.paths:
            if self.max_doppler_hz and abs(p.doppler_hz) > bound:
                raise ValueError(
                    f"path Doppler {p.doppler_hz} exceeds bound {self.max_doppler_hz}"
                )

    @property
    def max_delay(self) -> int:
        return max(p.delay_samples for p in self.paths)


def kernel_from_paths(path_list: PathList, cfg: WaveformConfig) -> np.ndarray:
    """Build the dense (m, n) delay-Doppler kernel for a path set.

    Each path lands in delay row ``delay_samples``.  Its Doppler response
    is the n-point DFT of the complex exponential sampled at the n pulse
    instants, so an on-grid shift collapses to a single bin and an
    off-grid one spreads over the whole column (Dirichlet leakage, never
    truncated).  Gains are phase-referenced to the middle of a pulse,
    which is where the sampled exponential best represents the Doppler
    rotation over one pulse.  A single path (delay 0, 0 Hz, gain g) gives
    one entry g*m*n at (0, 0), matching the 1/(m*n) normalisation used in
    apply_dd_kernel.
    """
    m, n = cfg.m, cfg.n
    kernel = np.zeros((m, n), dtype=complex)
    t_sym = cfg.symbol_spacing
    sym_idx = np.arange(n)
    for p in path_list.paths:
        if not 0 <= p.delay_samples < m:
            raise ValueError(f"path delay {p.delay_samples} outside grid range [0, {m})")
        ramp = np.exp(2j * np.pi * p.doppler_hz * t_sym * sym_idx)
        mid_pulse = np.exp(1j * np.pi * p.doppler_hz * (m - 1) / cfg.sample_rate)
        kernel[p.delay_samples, :] += p.gain * mid_pulse * m * np.fft.fft(ramp)
    return kernel


def apply_dd_kernel(frame, kernel, method: str = "fft") -> np.ndarray:
    """Pass a delay-Doppler frame through a kernel channel.

    The output is the 2-D circular convolution of frame and kernel over
    the (delay, Doppler) torus, scaled by 1/(m*n).  ``method="fft"``
    diagonalises with a 2-D DFT; ``method="direct"`` accumulates rolled
    copies and exists as an independent slow route for cross-checking.
    """
    frame = np.asarray(frame, dtype=complex)
    kernel = np.asarray(kernel, dtype=complex)
    if frame.shape != kernel.shape:
        raise ValueError(f"frame {frame.shape} and kernel {kernel.shape} shapes differ")
    m, n = frame.shape
    if method == "fft":
        out = np.fft.ifft2(np.fft.fft2(frame) * np.fft.fft2(kernel))
    elif method == "direct":
        out = np.zeros_like(frame)
        rows, cols = np.nonzero(kernel)
        for l, k in zip(rows, cols):
            out += kernel[l, k] * np.roll(frame, (l, k), axis=(0, 1))
    else:
        raise ValueError(f"unknown method {method!r}")
    return out / (m * n)


def apply_tdl(samples, path_list: PathList, sample_rate: float, t0: float = 0.0) -> np.ndarray:
    """Tapped-delay-line channel on a sample stream.

    Output sample i sums gain * s[i - delay] * exp(j*2*pi*doppler*(t0 + i/fs))
    over paths; samples before the start of the stream read as zero, so
    callers must include whatever prefix provides their circularity.
    ``t0`` is the absolute time of samples[0].
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("samples must be a non-empty 1-D array")
    t = t0 + np.arange(samples.size) / sample_rate
    out = np.zeros_like(samples)
    for p in path_list.paths:
        delayed = np.zeros_like(samples)
        if p.delay_samples == 0:
            delayed[:] = samples
        elif p.delay_samples < samples.size:
            delayed[p.delay_samples:] = samples[:-p.delay_samples]
        out += p.gain * delayed * np.exp(2j * np.pi * p.doppler_hz * t)
    return out


def noise_variance(samples, snr_db: float) -> float:
    """Per-sample complex noise variance for a target SNR against measured power."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("cannot measure power of an empty array")
    power = float(np.mean(np.abs(samples) ** 2))
    if power == 0.0:
        raise ValueError("input has zero power; SNR is undefined")
    if math.isinf(snr_db):
        return 0.0
    return power / (10.0 ** (snr_db / 10.0))


def add_awgn(samples, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise at an SNR measured from the input.

    ``snr_db = inf`` is the no-noise sentinel and returns a copy.  Works on
    arrays of any shape; power is measured over all entries.
    """
    samples = np.asarray(samples, dtype=complex)
    var = noise_variance(samples, snr_db)
    if var == 0.0:
        return samples.copy()
    noise = rng.standard_normal(samples.shape) + 1j * rng.standard_normal(samples.shape)
    return samples + np.sqrt(var / 2.0) * noise


# ---------------------------------------------------------------------------
# MIMO plumbing

@dataclass(frozen=True)
class MimoChannel:
    """An n_r x n_t grid of single-link channels.

    ``links[r][t]`` carries rx antenna r's view of tx antenna t, either a
    PathList (tdl mode) or a dense kernel array (dd_kernel mode).
    """

    n_t: int
    n_r: int
    links: tuple

    def __post_init__(self):
        if self.n_t < 1 or self.n_r < 1:
            raise ValueError("antenna counts must be at least 1")
        if len(self.links) != self.n_r or any(len(row) != self.n_t for row in self.links):
            raise ValueError("links must be an n_r x n_t nested sequence")


def apply_mimo_kernel(frames, mimo: MimoChannel) -> list:
    """Superpose per-link kernel channels: output r sums links[r][t] applied to frame t."""
    if len(frames) != mimo.n_t:
        raise ValueError(f"expected {mimo.n_t} transmit frames, got {len(frames)}")
    out = []
    for r in range(mimo.n_r):
        acc = np.zeros_like(np.asarray(frames[0], dtype=complex))
        for t in range(mimo.n_t):
            acc = acc + apply_dd_kernel(frames[t], mimo.links[r][t])
        out.append(acc)
    return out


def apply_mimo_tdl(streams, mimo: MimoChannel, sample_rate: float, t0: float = 0.0) -> list:
    """Superpose per-link TDL channels on modulated sample streams."""
    if len(streams) != mimo.n_t:
        raise ValueError(f"expected {mimo.n_t} transmit streams, got {len(streams)}")
    out = []
    for r in range(mimo.n_r):
        acc = np.zeros_like(np.asarray(streams[0], dtype=complex))
        for t in range(mimo.n_t):
            acc = acc + apply_tdl(streams[t], mimo.links[r][t], sample_rate, t0)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# random channel generation

@dataclass(frozen=True)
class ChannelGenerator:
    """Seeded generic TDL profile.

    Draws ``n_paths`` paths with integer delays inside
    ``[0, delay_spread_samples]`` (first path pinned to zero so the frame
    prefix bound is tight), Rayleigh gains shaped by the chosen
    power-delay profile, and per-path Doppler ``max_doppler_hz * cos(theta)``
    with theta uniform.
    """

    n_paths: int = 6
    delay_spread_samples: int = 4
    max_doppler_hz: float = 555.0
    profile: str = "exponential"

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if self.delay_spread_samples < 0:
            raise ValueError("delay_spread_samples must be non-negative")
        if self.profile not in ("exponential", "uniform"):
            raise ValueError(f"unknown power-delay profile {self.profile!r}")
        if self.max_doppler_hz < 0:
            raise ValueError("max_doppler_hz must be non-negative")

    def draw(self, rng: np.random.Generator) -> PathList:
        delays = np.zeros(self.n_paths, dtype=int)
        if self.n_paths > 1:
            delays[1:] = rng.integers(0, self.delay_spread_samples + 1, self.n_paths - 1)
        if self.profile == "exponential":
            # ~ -13 dB from first to last tap across the spread
            decay = 3.0 / max(self.delay_spread_samples, 1)
            powers = np.exp(-decay * delays)
        else:
            powers = np.ones(self.n_paths)
        powers = powers / powers.sum()
        gains = np.sqrt(powers / 2.0) * (
            rng.standard_normal(self.n_paths) + 1j * rng.standard_normal(self.n_paths)
        )
        thetas = rng.uniform(0.0, 2.0 * np.pi, self.n_paths)
        dopplers = self.max_doppler_hz * np.cos(thetas)
        paths = tuple(
            Path(int(d), float(nu), complex(g)) for d, nu, g in zip(delays, dopplers, gains)
        )
        return PathList(paths=paths, max_doppler_hz=self.max_doppler_hz)
