"""Echo-state network with closed-form readouts for per-frame equalization.

The reservoir steps along the delay axis of a frame: one step per delay
row, one input vector per step (that row's Doppler/time samples, receive
antennas concatenated).  A windowed buffer of recent input vectors is
part of the state, so the readout sees both the nonlinear reservoir
state and a raw linear tap history.  Readouts are solved per frame by
(optionally ridge-regularised) least squares; no gradient training.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .ddcore import Constellation, isfft, quantize, sfft
from .pilots import INTERLEAVED, SUPERIMPOSED, FrameDataset


@dataclass(frozen=True)
class ReservoirConfig:
    state_dim: int = 8
    input_dim: int = 14
    window_len: int = 20
    spectral_radius: float = 0.9
    input_scale: float = 0.05
    ridge: float = 1e-4
    l_forget: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.state_dim < 1 or self.input_dim < 1 or self.window_len < 1:
            raise ValueError("state_dim, input_dim and window_len must be at least 1")
        if self.spectral_radius < 0 or self.input_scale < 0 or self.ridge < 0:
            raise ValueError("spectral_radius, input_scale and ridge must be non-negative")
        if self.l_forget < 0:
            raise ValueError("l_forget must be non-negative")


def _split_tanh(z: np.ndarray) -> np.ndarray:
    # tanh applied to real and imaginary parts separately
    return np.tanh(z.real) + 1j * np.tanh(z.imag)


class Reservoir:
    """Fixed random recurrent network; only readouts are ever fitted.

    The transition matrix acts on [state; buffered inputs].  Its
    state-to-state block is dense real Gaussian rescaled so its spectral
    radius equals the configured value exactly; the input block is real
    Gaussian scaled by input_scale normalised by the fan-in, keeping the
    tanh nonlinearity in a comparable regime across window sizes.
    """

    def __init__(self, cfg: ReservoirConfig):
        self.cfg = cfg
        rng = np.random.default_rng(cfg.seed)
        w_state = rng.standard_normal((cfg.state_dim, cfg.state_dim))
        if cfg.spectral_radius == 0.0:
            w_state[:] = 0.0
        else:
            radius = float(np.max(np.abs(np.linalg.eigvals(w_state))))
            if radius == 0.0:
                raise ValueError("degenerate reservoir draw with zero spectral radius")
            w_state *= cfg.spectral_radius / radius
        fan_in = cfg.window_len * cfg.input_dim
        w_in = rng.standard_normal((cfg.state_dim, fan_in)) * (cfg.input_scale / np.sqrt(fan_in))
        self.w_state = w_state
        self.w_in = w_in

    @property
    def feature_dim(self) -> int:
        return self.cfg.state_dim + self.cfg.window_len * self.cfg.input_dim

    def run(self, inputs, initial_state=None) -> np.ndarray:
        """Drive the reservoir and collect the extended state matrix.

        ``inputs`` has one row per step.  Row t of the result concatenates
        the state before consuming input t with the buffered inputs
        [u(t), u(t-1), ..., u(t-window+1)] (zero-padded at the start).
        The initial state defaults to zero.
        """
        inputs = np.asarray(inputs, dtype=complex)
        if inputs.ndim != 2 or inputs.shape[1] != self.cfg.input_dim:
            raise ValueError(
                f"inputs must be (steps, {self.cfg.input_dim}), got {inputs.shape}"
            )
        steps, d = inputs.shape
        w = self.cfg.window_len
        buf = np.zeros((steps, w * d), dtype=complex)
        for lag in range(w):
            if lag < steps:
                buf[lag:, lag * d:(lag + 1) * d] = inputs[:steps - lag]
        states = np.zeros((steps, self.cfg.state_dim), dtype=complex)
        state = np.zeros(self.cfg.state_dim, dtype=complex)
        if initial_state is not None:
            state = np.asarray(initial_state, dtype=complex).copy()
        for t in range(steps):
            states[t] = state
            state = _split_tanh(self.w_state @ state + self.w_in @ buf[t])
        return np.hstack([states, buf])


def new_reservoir(cfg: ReservoirConfig) -> Reservoir:
    return Reservoir(cfg)


def delayed_state_matrix(res: Reservoir, inputs, delay: int) -> np.ndarray:
    """State matrix realigned so row t sees inputs up to step t + delay.

    Appends ``delay`` zero input vectors, runs the reservoir, and drops
    the first ``delay`` rows; the result has as many rows as ``inputs``.
    """
    inputs = np.asarray(inputs, dtype=complex)
    if delay < 0:
        raise ValueError("delay must be non-negative")
    if delay == 0:
        return res.run(inputs)
    pad = np.zeros((delay, inputs.shape[1]), dtype=complex)
    big = res.run(np.vstack([inputs, pad]))
    return big[delay:]


# ---------------------------------------------------------------------------
# closed-form readouts

def _solve_ls(a: np.ndarray, b: np.ndarray, ridge: float) -> np.ndarray:
    """Least squares with ridge scaled to the feature power.

    ridge == 0 gives the exact minimum-norm solution.  Otherwise the
    effective penalty is ridge times the mean diagonal of a^H a, so the
    knob is dimensionless.  The normal equations are formed on whichever
    side is smaller.
    """
    if ridge == 0.0:
        return np.linalg.lstsq(a, b, rcond=None)[0]
    rows, cols = a.shape
    lam = ridge * (np.linalg.norm(a) ** 2 / max(cols, 1))
    if lam == 0.0:
        return np.linalg.lstsq(a, b, rcond=None)[0]
    ah = a.conj().T
    if rows >= cols:
        return np.linalg.solve(ah @ a + lam * np.eye(cols), ah @ b)
    return ah @ np.linalg.solve(a @ ah + lam * np.eye(rows), b)


def fit_full(state_matrix: np.ndarray, targets: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Readout weights fitting every row of the targets."""
    state_matrix = np.asarray(state_matrix)
    targets = np.asarray(targets)
    if state_matrix.shape[0] != targets.shape[0]:
        raise ValueError("state matrix and targets disagree on step count")
    return _solve_ls(state_matrix, targets, ridge)


def fit_masked(state_matrix: np.ndarray, targets: np.ndarray, mask: np.ndarray,
               ridge: float = 0.0) -> np.ndarray:
    """Per-column readout fit restricted to that column's masked rows.

    Column j of the weights solves least squares over only the rows where
    mask[:, j] is set, which is identical to zeroing the unmasked rows of
    both sides before a full solve.  Columns sharing a support are solved
    together.  A column with empty support gets zero weights and a warning.
    """
    state_matrix = np.asarray(state_matrix)
    targets = np.asarray(targets)
    mask = np.asarray(mask, dtype=bool)
    if targets.shape != mask.shape or state_matrix.shape[0] != targets.shape[0]:
        raise ValueError("state matrix, targets and mask shapes are inconsistent")
    n_out = targets.shape[1]
    weights = np.zeros((state_matrix.shape[1], n_out), dtype=complex)
    groups: dict = {}
    for j in range(n_out):
        groups.setdefault(mask[:, j].tobytes(), []).append(j)
    empty = []
    for key, cols in groups.items():
        support = np.frombuffer(key, dtype=bool)
        if not support.any():
            empty.extend(cols)
            continue
        sub = state_matrix[support]
        weights[:, cols] = _solve_ls(sub, targets[np.ix_(support, cols)], ridge)
    if empty:
        warnings.warn(f"empty pilot support for output column(s) {sorted(empty)}; weights zeroed")
    return weights


def predict(state_matrix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.asarray(state_matrix) @ np.asarray(weights)


@dataclass
class ReadoutWeights:
    w_out: np.ndarray
    chosen_delay: int


def train_episodes(res: Reservoir, episodes, ridge: float = 0.0, l_forget: int = 0):
    """Fit one readout over several training episodes with a shared delay search.

    Each episode is an (inputs, targets, mask) triple; ``mask`` may be
    None for full supervision.  Every episode is run through the
    reservoir independently (zero initial state each), and for each
    candidate delay l in [0, l_forget] the realigned state matrices are
    stacked into one regression (so the readout at step t can see inputs
    up to t + l, which is what inverting a causal delay spread requires).
    The training loss is the Frobenius-norm residual on the union of the
    pilot supports normalised by the target norm.  Smallest loss wins;
    ties go to the smallest delay.  Returns (ReadoutWeights, losses).
    """
    if not episodes:
        raise ValueError("need at least one training episode")
    runs, target_list, mask_list = [], [], []
    any_mask = any(ep[2] is not None for ep in episodes)
    steps = None
    for inputs, targets, mask in episodes:
        inputs = np.asarray(inputs, dtype=complex)
        targets = np.asarray(targets, dtype=complex)
        if targets.shape[0] != inputs.shape[0]:
            raise ValueError("inputs and targets disagree on step count")
        if steps is None:
            steps = inputs.shape[0]
        elif inputs.shape[0] != steps:
            raise ValueError("episodes disagree on step count")
        if l_forget >= steps:
            raise ValueError(f"l_forget={l_forget} must be smaller than the sequence length {steps}")
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
        elif any_mask:
            mask = np.ones(targets.shape, dtype=bool)
        pad = np.zeros((l_forget, inputs.shape[1]), dtype=complex)
        runs.append(res.run(np.vstack([inputs, pad]) if l_forget else inputs))
        target_list.append(targets)
        mask_list.append(mask)
    targets_all = np.vstack(target_list)
    mask_all = np.vstack(mask_list) if any_mask else None
    if mask_all is not None and not mask_all.any():
        raise ValueError("pilot support is empty")
    support = mask_all if mask_all is not None else np.ones(targets_all.shape, dtype=bool)
    denom = float(np.linalg.norm(targets_all[support]))
    losses = np.zeros(l_forget + 1)
    best_loss = np.inf
    best: ReadoutWeights | None = None
    for delay in range(l_forget + 1):
        sb = np.vstack([big[delay:delay + steps] for big in runs])
        if mask_all is not None:
            w = fit_masked(sb, targets_all, mask_all, ridge)
        else:
            w = fit_full(sb, targets_all, ridge)
        resid = (targets_all - sb @ w)[support]
        loss = float(np.linalg.norm(resid)) / denom if denom > 0 else 0.0
        losses[delay] = loss
        if loss < best_loss:
            best_loss = loss
            best = ReadoutWeights(w_out=w, chosen_delay=delay)
    return best, losses


def train_with_delay_search(res: Reservoir, inputs, targets, mask=None,
                            ridge: float = 0.0, l_forget: int = 0):
    """Single-episode wrapper around :func:`train_episodes`."""
    return train_episodes(res, [(inputs, targets, mask)], ridge=ridge, l_forget=l_forget)


# ---------------------------------------------------------------------------
# detection

def detect(prediction: np.ndarray, constellation: Constellation, scheme: str,
           mask: np.ndarray | None = None,
           pilot_frame: np.ndarray | None = None,
           refine: int = 2) -> np.ndarray:
    """Turn a soft frame estimate into detected data symbols.

    ``prediction`` estimates the full transmitted frame (stacked over
    transmit antennas).  Interleaved: quantize and keep the data cells
    (complement of the mask).  Superimposed: subtract the known pilot
    component, quantize, then run ``refine`` decision-feedback passes
    that re-add the data's own masked time-frequency component (removed
    at the transmitter to make room for the pilot) as reconstructed from
    the current decisions.  Correct decisions are a fixed point, so a
    clean frame detects exactly.  Superimposed detection needs ``mask``
    (the (m, n) time-frequency support) when ``refine`` > 0.
    """
    prediction = np.asarray(prediction, dtype=complex)
    if scheme == SUPERIMPOSED:
        if pilot_frame is not None:
            prediction = prediction - pilot_frame
        decided = quantize(prediction, constellation)
        if refine > 0:
            if mask is None:
                raise ValueError("superimposed refinement needs the time-frequency mask")
            mask = np.asarray(mask, dtype=bool)
            if prediction.shape[0] % mask.shape[0]:
                raise ValueError("stacked prediction rows not divisible by the mask rows")
            blocks = prediction.shape[0] // mask.shape[0]
            m = mask.shape[0]
            for _ in range(refine):
                filled = prediction.copy()
                for b in range(blocks):
                    rows = slice(b * m, (b + 1) * m)
                    filled[rows] += sfft(isfft(decided[rows]) * mask)
                new = quantize(filled, constellation)
                if np.array_equal(new, decided):
                    break
                decided = new
        return decided
    if scheme == INTERLEAVED:
        if mask is None:
            raise ValueError("interleaved detection needs the pilot mask")
        mask = np.asarray(mask, dtype=bool)
        return quantize(prediction, constellation) * ~mask
    raise ValueError(f"unknown scheme {scheme!r}")


# ---------------------------------------------------------------------------
# multi-reservoir partitioning

def row_dft(a: np.ndarray) -> np.ndarray:
    """Unitary DFT along each row (Doppler axis -> time axis)."""
    return np.fft.fft(np.asarray(a, dtype=complex), axis=1, norm="ortho")


def inverse_row_dft(a: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.asarray(a, dtype=complex), axis=1, norm="ortho")


@dataclass
class SubDataset:
    """One column group of the row-DFT-transformed dataset."""

    columns: np.ndarray
    x_train: np.ndarray
    y_train: np.ndarray
    y_test: np.ndarray
    mask: np.ndarray | None


def partition_multi_rc(dataset: FrameDataset, k: int) -> list:
    """Split a frame dataset into k column groups in the delay-time domain.

    All matrices are transformed by a unitary DFT along their rows, then
    consecutive columns are grouped (k-1 groups of floor(n/k), the last
    takes the remainder).  Each group becomes an independent learning
    problem with input dimension equal to its width.  For the interleaved
    scheme the pilot mask must be row-supported (kind ``block_rows``) so
    masking commutes with the row DFT; the transformed mask is then the
    mask itself.  Detection must invert the row DFT after reassembling
    the per-group predictions.
    """
    n = dataset.y_train.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if dataset.scheme == INTERLEAVED and dataset.pattern.kind != "block_rows":
        raise ValueError("multi-reservoir interleaved runs need a block_rows pattern")
    fx = row_dft(dataset.x_train)
    fy_train = row_dft(dataset.y_train)
    fy_test = row_dft(dataset.y_test)
    stacked_mask = None
    if dataset.scheme == INTERLEAVED:
        stacked_mask = np.tile(dataset.pattern.mask, (dataset.n_t, 1))
    base = n // k
    subs = []
    for g in range(k):
        lo = g * base
        hi = (g + 1) * base if g < k - 1 else n
        cols = np.arange(lo, hi)
        subs.append(SubDataset(
            columns=cols,
            x_train=fx[:, cols],
            y_train=fy_train[:, cols],
            y_test=fy_test[:, cols],
            mask=None if stacked_mask is None else stacked_mask[:, cols],
        ))
    return subs


# ---------------------------------------------------------------------------
# stacked-matrix / step-sequence layout

def to_steps(stacked: np.ndarray, blocks: int) -> np.ndarray:
    """(blocks*m, n) stacked matrix -> (m, blocks*n) step sequence.

    Step t concatenates row t of every antenna block, which is the
    reservoir's per-step input (or target) vector.
    """
    stacked = np.asarray(stacked)
    if stacked.shape[0] % blocks:
        raise ValueError("stacked rows not divisible by block count")
    m = stacked.shape[0] // blocks
    return stacked.reshape(blocks, m, stacked.shape[1]).transpose(1, 0, 2).reshape(m, -1)


def from_steps(seq: np.ndarray, blocks: int) -> np.ndarray:
    """Inverse of to_steps."""
    seq = np.asarray(seq)
    if seq.shape[1] % blocks:
        raise ValueError("sequence columns not divisible by block count")
    n = seq.shape[1] // blocks
    m = seq.shape[0]
    return seq.reshape(m, blocks, n).transpose(1, 0, 2).reshape(blocks * m, n)
