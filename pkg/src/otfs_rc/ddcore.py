"""Delay-Doppler core: grid transforms, the time-domain modem, constellations.

Conventions used throughout the package:

* A delay-Doppler frame is a complex ``(m, n)`` array.  Rows index delay
  bins (``m`` of them, one per time sample within a pulse) and columns
  index Doppler bins (``n`` of them, one per pulse in the frame).
* A time-frequency grid is a complex ``(m, n)`` array.  Rows index
  subcarriers, columns index multicarrier symbols.

Both transforms are unitary, so symbol energy is preserved end to end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STANDALONE = "standalone"
OVERLAY = "overlay"


@dataclass(frozen=True)
class WaveformConfig:
    """Grid geometry and framing for one transmitted frame.

    ``m`` delay bins / subcarriers, ``n`` Doppler bins / symbols.  The
    pulse duration is ``1/delta_f`` so the grid is critically sampled at
    ``m * delta_f``.  ``cp_len`` is in samples; a ``standalone`` frame
    carries a single cyclic prefix, an ``overlay`` frame carries one per
    symbol (plain CP-OFDM framing underneath).
    """

    m: int
    n: int
    delta_f: float = 15e3
    cp_len: int = 0
    frame_structure: str = STANDALONE

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.m}x{self.n}")
        if not 0 <= self.cp_len < self.m:
            raise ValueError(f"cp_len must lie in [0, m), got {self.cp_len}")
        if self.frame_structure not in (STANDALONE, OVERLAY):
            raise ValueError(f"unknown frame_structure {self.frame_structure!r}")
        if not self.delta_f > 0:
            raise ValueError("delta_f must be positive")

    @property
    def delta_t(self) -> float:
        """Pulse duration in seconds; delta_t * delta_f == 1 by construction."""
        return 1.0 / self.delta_f

    @property
    def sample_rate(self) -> float:
        return self.m * self.delta_f

    @property
    def symbol_spacing(self) -> float:
        """Seconds between consecutive pulse starts, CP included for overlay."""
        if self.frame_structure == OVERLAY:
            return (self.m + self.cp_len) / self.sample_rate
        return self.delta_t

    @property
    def frame_len(self) -> int:
        """Total samples in one modulated frame, prefix included."""
        if self.frame_structure == OVERLAY:
            return self.n * (self.cp_len + self.m)
        return self.cp_len + self.m * self.n


def _as_frame(values, cfg: WaveformConfig | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D grid, got shape {arr.shape}")
    if cfg is not None and arr.shape != (cfg.m, cfg.n):
        raise ValueError(f"grid shape {arr.shape} does not match config ({cfg.m}, {cfg.n})")
    return arr


def isfft(dd, cfg: WaveformConfig | None = None) -> np.ndarray:
    """Delay-Doppler frame -> time-frequency grid (unitary).

    Entry (subcarrier, symbol) of the output is the double sum of the
    input against exp(+j2*pi*symbol*doppler/n) * exp(-j2*pi*subcarrier*delay/m),
    normalised by 1/sqrt(m*n).
    """
    dd = _as_frame(dd, cfg)
    return np.fft.fft(np.fft.ifft(dd, axis=1, norm="ortho"), axis=0, norm="ortho")


def sfft(tf, cfg: WaveformConfig | None = None) -> np.ndarray:
    """Time-frequency grid -> delay-Doppler frame; exact inverse of isfft."""
    tf = _as_frame(tf, cfg)
    return np.fft.fft(np.fft.ifft(tf, axis=0, norm="ortho"), axis=1, norm="ortho")


def modulate(dd, cfg: WaveformConfig) -> np.ndarray:
    """Serialise a delay-Doppler frame into time samples, prefix included.

    Internally the frame passes through the time-frequency grid and a
    per-symbol m-point inverse DFT with rectangular pulses; the two steps
    collapse into a single inverse DFT along the Doppler axis.  Core sample
    ``sym*m + l`` equals the (l, sym) entry of that delay-time array.
    """
    dd = _as_frame(dd, cfg)
    delay_time = np.fft.ifft(dd, axis=1, norm="ortho")
    if cfg.frame_structure == OVERLAY:
        blocks = []
        for col in delay_time.T:
            if cfg.cp_len:
                blocks.append(col[-cfg.cp_len:])
            blocks.append(col)
        return np.concatenate(blocks)
    core = delay_time.reshape(-1, order="F")
    if cfg.cp_len:
        return np.concatenate([core[-cfg.cp_len:], core])
    return core.copy()


def demodulate(samples, cfg: WaveformConfig) -> np.ndarray:
    """Strip prefix(es) and map time samples back to a delay-Doppler frame."""
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 1 or samples.size != cfg.frame_len:
        raise ValueError(
            f"expected {cfg.frame_len} samples for this config, got shape {samples.shape}"
        )
    if cfg.frame_structure == OVERLAY:
        blocks = samples.reshape(cfg.n, cfg.cp_len + cfg.m)
        delay_time = blocks[:, cfg.cp_len:].T
    else:
        core = samples[cfg.cp_len:]
        delay_time = core.reshape(cfg.m, cfg.n, order="F")
    return np.fft.fft(delay_time, axis=1, norm="ortho")


# ---------------------------------------------------------------------------
# constellations

@dataclass(frozen=True)
class Constellation:
    """A symbol alphabet with a Gray bit labelling.

    ``points[i]`` is labelled by the big-endian bits of ``i``; adjacent
    (nearest-neighbour) points differ in exactly one bit for the built-in
    alphabets.
    """

    name: str
    points: tuple

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("constellation needs at least two points")
        k = len(self.points).bit_length() - 1
        if 2 ** k != len(self.points):
            raise ValueError("constellation size must be a power of two")

    @property
    def bits_per_symbol(self) -> int:
        return len(self.points).bit_length() - 1

    @property
    def point_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    @property
    def mean_energy(self) -> float:
        return float(np.mean(np.abs(self.point_array) ** 2))


BPSK = Constellation("bpsk", (1 + 0j, -1 + 0j))
QPSK = Constellation("qpsk", (1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j))

_CONSTELLATIONS = {"bpsk": BPSK, "qpsk": QPSK}


def get_constellation(name: str) -> Constellation:
    try:
        return _CONSTELLATIONS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}") from None


def map_bits(bits, constellation: Constellation) -> np.ndarray:
    """Map a flat 0/1 array onto constellation symbols, MSB first per symbol."""
    bits = np.asarray(bits)
    k = constellation.bits_per_symbol
    if bits.size % k:
        raise ValueError(f"bit count {bits.size} not divisible by {k}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    weights = 1 << np.arange(k - 1, -1, -1)
    idx = bits.reshape(-1, k) @ weights
    return constellation.point_array[idx]


def quantize(values, constellation: Constellation) -> np.ndarray:
    """Snap each entry to the nearest constellation point.

    Ties resolve to the lowest point index, so the result is deterministic.
    """
    values = np.asarray(values, dtype=complex)
    flat = values.ravel()
    dist = np.abs(flat[:, None] - constellation.point_array[None, :])
    nearest = np.argmin(dist, axis=1)
    return constellation.point_array[nearest].reshape(values.shape)


def symbols_to_bits(symbols, constellation: Constellation) -> np.ndarray:
    """Inverse of map_bits for on-alphabet symbols (nearest point otherwise)."""
    symbols = np.asarray(symbols, dtype=complex)
    flat = symbols.ravel()
    dist = np.abs(flat[:, None] - constellation.point_array[None, :])
    idx = np.argmin(dist, axis=1)
    k = constellation.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8).reshape(-1)
