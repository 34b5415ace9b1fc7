"""Pilot patterns, frame assembly, and training-set extraction.

Two pilot schemes share one mask abstraction:

* ``interleaved``: the mask lives on the delay-Doppler grid.  Pilot cells
  carry seeded pseudo-random constellation symbols, data cells carry the
  payload, and the two never overlap.
* ``superimposed``: the mask lives on the time-frequency grid.  A scaled
  pilot occupies the masked cells and the payload is pre-distorted so its
  time-frequency image vanishes exactly on the mask.  Pilot and payload
  then stay separable at the receiver because the ideal channel acts
  multiplicatively per time-frequency cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ddcore import Constellation, isfft, map_bits, sfft

INTERLEAVED = "interleaved"
SUPERIMPOSED = "superimposed"

PATTERN_KINDS = ("staircase", "lattice", "blockwise_columns", "block_rows")


@dataclass(frozen=True)
class PilotPattern:
    """A boolean (m, n) mask with at least one pilot and one data cell."""

    mask: np.ndarray
    kind: str

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.ndim != 2:
            raise ValueError("mask must be 2-D")
        if not mask.any() or mask.all():
            raise ValueError("mask needs at least one pilot cell and one data cell")
        object.__setattr__(self, "mask", mask)

    @property
    def overhead(self) -> float:
        """Fraction of grid cells occupied by pilots."""
        return float(self.mask.mean())

    @property
    def n_pilot_cells(self) -> int:
        return int(self.mask.sum())


def overhead(pattern: PilotPattern) -> float:
    return pattern.overhead


def make_pattern(kind: str, m: int, n: int, target_overhead: float, seed: int = 0) -> PilotPattern:
    """Build a pilot mask whose overhead is the closest achievable value
    at or above ``target_overhead`` given the kind's granularity.

    * ``staircase``: ceil(target*m*n) cells laid out as diagonally wrapped
      per-column runs; cell-level granularity.  ``seed`` rotates the start row.
    * ``lattice``: same cell budget, but each column's cells are spread
      evenly over the rows with a one-row diagonal drift per column.  Use
      this when the mask must sample its grid uniformly (a run of adjacent
      cells cannot pin down variation between far-apart rows).
    * ``blockwise_columns``: ceil(target*n) full columns, evenly spread.
    * ``block_rows``: ceil(target*m) full rows, evenly spread.  Rows of the
      mask are constant, which is what lets the mask commute with DFTs
      taken along rows.
    """
    if m < 1 or n < 1:
        raise ValueError("grid must be at least 1x1")
    if not 0.0 < target_overhead < 1.0:
        raise ValueError(f"target_overhead must lie in (0, 1), got {target_overhead}")
    mask = np.zeros((m, n), dtype=bool)
    if kind in ("staircase", "lattice"):
        total = math.ceil(target_overhead * m * n)
        if total >= m * n:
            raise ValueError("target_overhead leaves no data cell for this grid")
        base, extra = divmod(total, n)
        step = max(base, 1)
        offset = seed % m
        for col in range(n):
            height = base + (1 if col < extra else 0)
            if height == 0:
                continue
            if kind == "staircase":
                rows = (offset + col * step + np.arange(height)) % m
            else:
                rows = (offset + col + (np.arange(height) * m) // height) % m
            mask[rows, col] = True
    elif kind == "blockwise_columns":
        n_cols = math.ceil(target_overhead * n)
        if n_cols >= n:
            raise ValueError("target_overhead leaves no data column for this grid")
        cols = (np.arange(n_cols) * n) // n_cols
        mask[:, cols] = True
    elif kind == "block_rows":
        n_rows = math.ceil(target_overhead * m)
        if n_rows >= m:
            raise ValueError("target_overhead leaves no data row for this grid")
        rows = (np.arange(n_rows) * m) // n_rows
        mask[rows, :] = True
    else:
        raise ValueError(f"unknown pattern kind {kind!r}; expected one of {PATTERN_KINDS}")
    return PilotPattern(mask=mask, kind=kind)


# ---------------------------------------------------------------------------
# frame assembly

def pilot_symbols(pattern: PilotPattern, constellation: Constellation,
                  pilot_seed: int, antenna: int = 0) -> np.ndarray:
    """Receiver-regenerable pilot values on the mask support, row-major order.

    Everything here derives from (pilot_seed, antenna), so transmitter and
    receiver compute identical values without sharing frame data.
    """
    rng = np.random.default_rng([pilot_seed, antenna])
    idx = rng.integers(0, len(constellation.points), pattern.n_pilot_cells)
    return constellation.point_array[idx]


def build_interleaved(data_bits, pattern: PilotPattern, constellation: Constellation,
                      pilot_seed: int, antenna: int = 0) -> np.ndarray:
    """Assemble a delay-Doppler frame with disjoint pilot and data cells.

    Data bits fill the unmasked cells in row-major order; bit count must
    match the free cell count exactly.
    """
    mask = pattern.mask
    n_data = mask.size - pattern.n_pilot_cells
    bits = np.asarray(data_bits)
    need = n_data * constellation.bits_per_symbol
    if bits.size != need:
        raise ValueError(f"expected {need} data bits for this pattern, got {bits.size}")
    frame = np.zeros(mask.shape, dtype=complex)
    frame[mask] = pilot_symbols(pattern, constellation, pilot_seed, antenna)
    frame[~mask] = map_bits(bits, constellation)
    return frame


def superimposed_pilot_phases(pattern: PilotPattern, pilot_seed: int, antenna: int = 0) -> np.ndarray:
    """Unit-modulus time-frequency pilot values on the mask support.

    Per-antenna phases keep the stacked multi-antenna regression
    identifiable; a constant-amplitude pilot on every antenna would make
    the per-antenna targets indistinguishable.
    """
    rng = np.random.default_rng([pilot_seed, antenna, 7])
    phases = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, pattern.n_pilot_cells))
    full = np.zeros(pattern.mask.shape, dtype=complex)
    full[pattern.mask] = phases
    return full


def build_superimposed(data_frame, pattern: PilotPattern, power_fraction: float,
                       pilot_phases: np.ndarray | None = None) -> tuple:
    """Superimpose a scaled time-frequency pilot onto a payload frame.

    Returns ``(frame, scale)``.  The payload is pre-distorted so that the
    time-frequency image of the output restricted to the mask equals
    ``scale * pilot`` exactly, and off the mask equals the payload's own
    image.  ``scale`` solves the energy split: pilot energy is
    ``power_fraction`` of total frame energy, exactly, because the two
    components are orthogonal by construction.
    """
    if not 0.0 < power_fraction < 1.0:
        raise ValueError(f"power_fraction must lie in (0, 1), got {power_fraction}")
    frame = np.asarray(data_frame, dtype=complex)
    if frame.shape != pattern.mask.shape:
        raise ValueError("data frame and pattern shapes differ")
    mask = pattern.mask
    if pilot_phases is None:
        pilot_tf = mask.astype(complex)
    else:
        pilot_tf = np.where(mask, pilot_phases, 0.0)
        mags = np.abs(pilot_tf[mask])
        if not np.allclose(mags, 1.0, atol=1e-9):
            raise ValueError("pilot phases must be unit modulus on the mask")
    payload = frame - sfft(isfft(frame) * mask)
    e_data = float(np.sum(np.abs(payload) ** 2))
    e_pilot_unit = float(pattern.n_pilot_cells)
    scale = math.sqrt(power_fraction * e_data / ((1.0 - power_fraction) * e_pilot_unit))
    return sfft(scale * pilot_tf) + payload, scale


# ---------------------------------------------------------------------------
# datasets

@dataclass
class FrameDataset:
    """Per-frame training and detection data in stacked matrix form.

    ``x_train``/``x_test`` stack transmit antennas vertically (m*n_t rows),
    ``y_train``/``y_test`` stack receive antennas (m*n_r rows).  For the
    interleaved scheme ``y_train`` and ``y_test`` alias the same received
    frame; for the superimposed scheme ``x_train`` is the known pilot
    component in the delay-Doppler domain, which detection subtracts.
    ``x_test`` is ground truth carried along for scoring only; nothing the
    receiver computes depends on it.
    """

    scheme: str
    pattern: PilotPattern
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    n_t: int = 1
    n_r: int = 1
    pilot_scale: float = 0.0
    noise_var: float = 0.0

    @property
    def grid_shape(self) -> tuple:
        return self.y_train.shape[0] // self.n_r, self.y_train.shape[1]


def _stack(frames) -> np.ndarray:
    return np.vstack([np.asarray(f, dtype=complex) for f in frames])


def unstack(stacked: np.ndarray, count: int) -> list:
    """Split a vertically stacked (count*m, n) matrix back into blocks."""
    if stacked.shape[0] % count:
        raise ValueError("stacked row count not divisible by block count")
    m = stacked.shape[0] // count
    return [stacked[i * m:(i + 1) * m] for i in range(count)]


def extract_datasets(received, scheme: str, pattern: PilotPattern,
                     constellation: Constellation | None = None,
                     pilot_seed: int = 0, pilot_scale: float = 0.0,
                     pilot_phases=None, x_test=None, n_t: int = 1,
                     antenna_offset: int = 0, noise_var: float = 0.0) -> FrameDataset:
    """Build the training/detection dataset a receiver sees for one frame.

    ``received`` is one (m, n) frame or a list of them, one per receive
    antenna.  Inputs beyond the received frames are protocol constants
    (mask, seed, scale, phases); ``x_test`` is optional ground truth for
    scoring.  ``antenna_offset`` shifts the pilot regeneration index so a
    per-antenna extraction stacked afterwards matches a direct stacked
    build.  For the superimposed scheme the pilot observation is the
    received frame projected onto the mask's time-frequency support, which
    isolates the pilot response exactly under the kernel channel model.
    """
    frames = [received] if isinstance(received, np.ndarray) and received.ndim == 2 else list(received)
    y_full = _stack(frames)
    m, n = frames[0].shape
    if pattern.mask.shape != (m, n):
        raise ValueError("pattern shape does not match received frames")
    if scheme == INTERLEAVED:
        if constellation is None:
            raise ValueError("interleaved extraction needs the constellation for pilot regen")
        mask = pattern.mask
        blocks = []
        for ant in range(antenna_offset, antenna_offset + n_t):
            ref = np.zeros((m, n), dtype=complex)
            ref[mask] = pilot_symbols(pattern, constellation, pilot_seed, ant)
            blocks.append(ref)
        x_train = _stack(blocks)
        y_train = y_full
        y_test = y_full
    elif scheme == SUPERIMPOSED:
        scales = np.atleast_1d(np.asarray(pilot_scale, dtype=float))
        if scales.size == 1:
            scales = np.repeat(scales, n_t)
        if scales.size != n_t or np.any(scales <= 0.0):
            raise ValueError("superimposed extraction needs one positive pilot scale per antenna")
        mask = pattern.mask
        blocks = []
        for ant in range(n_t):
            phases = None if pilot_phases is None else pilot_phases[ant]
            if phases is None:
                pilot_tf = mask.astype(complex)
            else:
                pilot_tf = np.where(mask, np.asarray(phases), 0.0)
            blocks.append(sfft(scales[ant] * pilot_tf))
        x_train = _stack(blocks)
        y_train = _stack([sfft(isfft(y) * mask) for y in frames])
        y_test = y_full
    else:
        raise ValueError(f"unknown pilot scheme {scheme!r}")
    if x_test is None:
        x_test = np.zeros_like(x_train)
    else:
        x_test = np.asarray(x_test, dtype=complex)
        if x_test.shape != x_train.shape:
            raise ValueError("x_test shape must match the stacked target shape")
    scale_out = pilot_scale
    if scheme == SUPERIMPOSED:
        scale_out = float(scales[0]) if scales.size == 1 else tuple(float(s) for s in scales)
    return FrameDataset(
        scheme=scheme, pattern=pattern, x_train=x_train, y_train=y_train,
        x_test=x_test, y_test=y_test, n_t=n_t, n_r=len(frames),
        pilot_scale=scale_out, noise_var=noise_var,
    )


def stack_mimo(per_antenna: list) -> FrameDataset:
    """Stack per-antenna single-link datasets into one MIMO dataset.

    All inputs must share the scheme and pattern.  Dataset i contributes
    transmit antenna i's targets and receive antenna i's observations;
    with one input this is the identity.
    """
    if not per_antenna:
        raise ValueError("need at least one dataset")
    first = per_antenna[0]
    for ds in per_antenna[1:]:
        if ds.scheme != first.scheme:
            raise ValueError("datasets disagree on scheme")
        if not np.array_equal(ds.pattern.mask, first.pattern.mask):
            raise ValueError("datasets disagree on pilot pattern")
    k = len(per_antenna)
    return FrameDataset(
        scheme=first.scheme,
        pattern=first.pattern,
        x_train=_stack([ds.x_train for ds in per_antenna]),
        y_train=_stack([ds.y_train for ds in per_antenna]),
        x_test=_stack([ds.x_test for ds in per_antenna]),
        y_test=_stack([ds.y_test for ds in per_antenna]),
        n_t=k, n_r=k,
        pilot_scale=first.pilot_scale,
        noise_var=first.noise_var,
    )
