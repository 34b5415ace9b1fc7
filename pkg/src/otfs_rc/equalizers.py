"""Frame equalizers: reservoir-computing detectors and classical baselines.

``equalize_frame`` is the single entry point.  It dispatches on the
equalizer kind, runs detection for one frame dataset, and returns the
detected symbols (stacked over transmit antennas) plus diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .ddcore import Constellation, isfft, quantize, sfft, symbols_to_bits
from .esn import (
    Reservoir,
    ReservoirConfig,
    delayed_state_matrix,
    detect,
    from_steps,
    inverse_row_dft,
    partition_multi_rc,
    predict,
    to_steps,
    train_episodes,
    train_with_delay_search,
)
from .pilots import INTERLEAVED, SUPERIMPOSED, FrameDataset, PilotPattern

RC_INTERLEAVED = "rc_interleaved"
RC_SUPERIMPOSED = "rc_superimposed"
DD_MMSE_PERFECT_CSI = "dd_mmse_perfect_csi"
TF_LMMSE_ESTIMATED = "tf_lmmse_estimated"

EQUALIZER_KINDS = (RC_INTERLEAVED, RC_SUPERIMPOSED, DD_MMSE_PERFECT_CSI, TF_LMMSE_ESTIMATED)

_RC_SCHEME = {RC_INTERLEAVED: INTERLEAVED, RC_SUPERIMPOSED: SUPERIMPOSED}


@dataclass(frozen=True)
class EqualizerSpec:
    kind: str
    k_rc: int = 1
    rc: ReservoirConfig | None = None

    def __post_init__(self):
        if self.kind not in EQUALIZER_KINDS:
            raise ValueError(f"unknown equalizer kind {self.kind!r}")
        if self.k_rc < 1:
            raise ValueError("k_rc must be at least 1")


@dataclass
class EqualizeResult:
    """Detected symbols plus per-frame diagnostics.

    ``detected`` is (m*n_t, n); for the interleaved scheme pilot cells are
    zeroed and only data cells are meaningful.  Diagnostics carry the
    delay-search loss curve, the chosen delay and the training-feature
    condition number per reservoir (empty for the baselines).
    """

    detected: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def equalize_frame(spec: EqualizerSpec, dataset: FrameDataset,
                   constellation: Constellation, kernel=None,
                   noise_var: float | None = None) -> EqualizeResult:
    """Equalize one frame.

    ``kernel`` is genie channel state for dd_mmse_perfect_csi (a dense
    delay-Doppler kernel).  ``noise_var`` is genie per-sample noise
    variance for the baselines; when omitted it falls back to the value
    carried by the dataset.
    """
    if noise_var is None:
        noise_var = dataset.noise_var
    if spec.kind in _RC_SCHEME:
        if dataset.scheme != _RC_SCHEME[spec.kind]:
            raise ValueError(
                f"{spec.kind} needs a {_RC_SCHEME[spec.kind]} dataset, got {dataset.scheme!r}"
            )
        return _equalize_rc(spec, dataset, constellation)
    if dataset.n_t != 1 or dataset.n_r != 1:
        raise ValueError(f"{spec.kind} supports single-antenna frames only")
    signal_power = constellation.mean_energy
    if dataset.scheme == SUPERIMPOSED:
        # the transmitted frame carries the pilot on top of the payload
        scale = np.atleast_1d(np.asarray(dataset.pilot_scale, dtype=float))[0]
        signal_power += scale ** 2 * dataset.pattern.n_pilot_cells / dataset.pattern.mask.size
    if spec.kind == DD_MMSE_PERFECT_CSI:
        if kernel is None:
            raise ValueError("dd_mmse_perfect_csi needs the channel kernel as side info")
        soft = dd_mmse_perfect_csi(dataset.y_test, kernel, noise_var,
                                   signal_power=signal_power)
    else:
        pilot_tf = isfft(dataset.x_train)
        soft = tf_lmmse_estimated(dataset.y_test, dataset.pattern, pilot_tf,
                                  noise_var, signal_power=signal_power)
    pilot = dataset.x_train if dataset.scheme == SUPERIMPOSED else None
    detected = detect(soft, constellation, dataset.scheme,
                      mask=dataset.pattern.mask, pilot_frame=pilot)
    return EqualizeResult(detected=detected, diagnostics={})


# ---------------------------------------------------------------------------
# reservoir-computing path

def _rc_config(spec: EqualizerSpec, input_dim: int, l_forget_cap: int) -> ReservoirConfig:
    base = spec.rc if spec.rc is not None else ReservoirConfig()
    return replace(base, input_dim=input_dim,
                   l_forget=min(base.l_forget, l_forget_cap))


def _roll_step_columns(step_mat: np.ndarray, blocks: int, shift: int) -> np.ndarray:
    """Cyclically shift each antenna block's columns of a step-space matrix."""
    m, total = step_mat.shape
    n = total // blocks
    return np.roll(step_mat.reshape(m, blocks, n), shift, axis=2).reshape(m, total)


def _equalize_rc(spec: EqualizerSpec, dataset: FrameDataset,
                 constellation: Constellation) -> EqualizeResult:
    m, n = dataset.grid_shape
    rc_base = spec.rc if spec.rc is not None else ReservoirConfig()
    l_forget = min(rc_base.l_forget, m - 1)
    losses, delays, conds = [], [], []

    if spec.k_rc == 1:
        inputs_train = to_steps(dataset.y_train, dataset.n_r)
        targets = to_steps(dataset.x_train, dataset.n_t)
        mask_steps = None
        if dataset.scheme == INTERLEAVED:
            stacked = np.tile(dataset.pattern.mask, (dataset.n_t, 1))
            mask_steps = to_steps(stacked, dataset.n_t).astype(bool)
        cfg = replace(rc_base, input_dim=inputs_train.shape[1], l_forget=l_forget)
        res = Reservoir(cfg)
        # the channel is a circular convolution along the Doppler axis, so
        # every cyclic column shift of the training pair obeys the same
        # channel and supplies fresh equations: n-fold augmentation that
        # ties the learned column mixing to its true circulant structure
        episodes = []
        for shift in range(n):
            episodes.append((
                _roll_step_columns(inputs_train, dataset.n_r, shift),
                _roll_step_columns(targets, dataset.n_t, shift),
                None if mask_steps is None
                else _roll_step_columns(mask_steps, dataset.n_t, shift).astype(bool),
            ))
        weights, loss_curve = train_episodes(
            res, episodes, ridge=cfg.ridge, l_forget=cfg.l_forget,
        )
        if dataset.scheme == INTERLEAVED:
            # same received frame feeds training and detection
            s_test = delayed_state_matrix(res, inputs_train, weights.chosen_delay)
        else:
            inputs_test = to_steps(dataset.y_test, dataset.n_r)
            s_test = delayed_state_matrix(res, inputs_test, weights.chosen_delay)
        soft_steps = predict(s_test, weights.w_out)
        soft = from_steps(soft_steps, dataset.n_t)
        losses.append(loss_curve)
        delays.append(weights.chosen_delay)
        conds.append(float(np.linalg.cond(delayed_state_matrix(res, inputs_train,
                                                               weights.chosen_delay))))
        soft_dd = soft
    else:
        subs = partition_multi_rc(dataset, spec.k_rc)
        pred_t = np.zeros_like(dataset.x_train)
        for idx, sub in enumerate(subs):
            inputs_train = to_steps(sub.y_train, dataset.n_r)
            targets = to_steps(sub.x_train, dataset.n_t)
            mask_steps = None
            if sub.mask is not None:
                mask_steps = to_steps(sub.mask, dataset.n_t).astype(bool)
            cfg = replace(rc_base, input_dim=inputs_train.shape[1],
                          l_forget=l_forget, seed=rc_base.seed + idx)
            res = Reservoir(cfg)
            weights, loss_curve = train_with_delay_search(
                res, inputs_train, targets, mask=mask_steps,
                ridge=cfg.ridge, l_forget=cfg.l_forget,
            )
            if dataset.scheme == INTERLEAVED:
                s_test = delayed_state_matrix(res, inputs_train, weights.chosen_delay)
            else:
                inputs_test = to_steps(sub.y_test, dataset.n_r)
                s_test = delayed_state_matrix(res, inputs_test, weights.chosen_delay)
            soft_steps = predict(s_test, weights.w_out)
            pred_t[:, sub.columns] = from_steps(soft_steps, dataset.n_t)
            losses.append(loss_curve)
            delays.append(weights.chosen_delay)
            conds.append(float(np.linalg.cond(delayed_state_matrix(res, inputs_train,
                                                                   weights.chosen_delay))))
        soft_dd = inverse_row_dft(pred_t)

    pilot = None
    if dataset.scheme == INTERLEAVED:
        mask = np.tile(dataset.pattern.mask, (dataset.n_t, 1))
    else:
        mask = dataset.pattern.mask
        pilot = dataset.x_train
    detected = detect(soft_dd, constellation, dataset.scheme, mask=mask, pilot_frame=pilot)
    diagnostics = {
        "loss_per_delay": losses,
        "chosen_delay": delays,
        "condition_number": conds,
        "train_loss": float(np.mean([lc[d] for lc, d in zip(losses, delays)])),
    }
    return EqualizeResult(detected=detected, diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# classical baselines

def dd_mmse_perfect_csi(y, kernel, noise_var: float, signal_power: float = 1.0) -> np.ndarray:
    """Per-bin MMSE deconvolution with genie channel knowledge.

    The kernel channel is diagonal in the 2-D DFT domain, so each bin is
    equalized independently; the regulariser is the per-cell noise to
    signal power ratio.  With noise_var = 0 this is an exact left inverse
    wherever the channel's 2-D spectrum is nonzero; bins where both the
    spectrum and noise_var vanish return zero (the MMSE limit).
    """
    y = np.asarray(y, dtype=complex)
    kernel = np.asarray(kernel, dtype=complex)
    if y.shape != kernel.shape:
        raise ValueError("received frame and kernel shapes differ")
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    if signal_power <= 0:
        raise ValueError("signal_power must be positive")
    m, n = y.shape
    gain = np.fft.fft2(kernel) / (m * n)
    den = np.abs(gain) ** 2 + noise_var / signal_power
    yf = np.fft.fft2(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xf = np.where(den > 0, np.conj(gain) * yf / np.where(den > 0, den, 1.0), 0.0)
    return np.fft.ifft2(xf)


def _interp_rows_then_cols(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Separable linear interpolation of a complex grid known on mask cells.

    First pass interpolates along each row that has at least one known
    cell (edges clamp); the second pass fills fully unknown rows by
    interpolating along each column among the rows completed in pass one.
    """
    m, n = values.shape
    out = np.zeros((m, n), dtype=complex)
    row_known = mask.any(axis=1)
    cols = np.arange(n)
    for i in np.nonzero(row_known)[0]:
        known = np.nonzero(mask[i])[0]
        out[i] = np.interp(cols, known, values[i, known].real) + \
            1j * np.interp(cols, known, values[i, known].imag)
    if not row_known.all():
        rows = np.arange(m)
        known_rows = np.nonzero(row_known)[0]
        missing = np.nonzero(~row_known)[0]
        for j in range(n):
            col = out[known_rows, j]
            out[missing, j] = np.interp(missing, known_rows, col.real) + \
                1j * np.interp(missing, known_rows, col.imag)
    return out


def tf_lmmse_estimated(y, pattern: PilotPattern, pilot_tf: np.ndarray,
                       noise_var: float, signal_power: float = 1.0) -> np.ndarray:
    """Classical pilot-aided equalizer in the time-frequency domain.

    The pattern marks time-frequency cells that carry only (known) pilot
    values, as the superimposed frame construction guarantees.  Per pilot
    cell a least-squares channel estimate is the received value over the
    pilot value; bilinear (separable linear) interpolation extends the
    estimate to the full grid, each cell is MMSE-equalized, and the
    result returns to the delay-Doppler domain.  Needs at least two
    distinct pilot rows and columns to interpolate both axes.
    """
    y = np.asarray(y, dtype=complex)
    mask = pattern.mask
    if y.shape != mask.shape:
        raise ValueError("received frame and pattern shapes differ")
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    rows = np.unique(np.nonzero(mask)[0])
    cols = np.unique(np.nonzero(mask)[1])
    if rows.size < 2 or cols.size < 2:
        raise ValueError("too few pilot cells: need two distinct rows and columns to interpolate")
    pilot_tf = np.asarray(pilot_tf, dtype=complex)
    y_tf = isfft(y)
    cell_est = np.zeros_like(y_tf)
    cell_est[mask] = y_tf[mask] / pilot_tf[mask]
    h_hat = _interp_rows_then_cols(cell_est, mask)
    den = np.abs(h_hat) ** 2 + noise_var / signal_power
    with np.errstate(divide="ignore", invalid="ignore"):
        x_tf = np.where(den > 0, np.conj(h_hat) * y_tf / np.where(den > 0, den, 1.0), 0.0)
    return sfft(x_tf)


# ---------------------------------------------------------------------------
# scoring

def ber(detected_bits, true_bits) -> tuple:
    """Exact bit error count: returns (errors, total, rate)."""
    detected_bits = np.asarray(detected_bits)
    true_bits = np.asarray(true_bits)
    if detected_bits.shape != true_bits.shape:
        raise ValueError("bit arrays must have identical shapes")
    if detected_bits.size == 0:
        raise ValueError("cannot compute a bit error rate over zero bits")
    errors = int(np.count_nonzero(detected_bits != true_bits))
    return errors, detected_bits.size, errors / detected_bits.size


def data_bits(frames_stacked: np.ndarray, constellation: Constellation,
              pattern: PilotPattern, scheme: str, n_t: int = 1) -> np.ndarray:
    """Extract payload bits from stacked frames in transmit order.

    Interleaved payload lives on the mask complement (row-major per
    antenna block); superimposed payload occupies the full grid.
    """
    frames_stacked = np.asarray(frames_stacked, dtype=complex)
    blocks = np.split(frames_stacked, n_t, axis=0)
    picked = []
    for block in blocks:
        if scheme == INTERLEAVED:
            picked.append(block[~pattern.mask])
        else:
            picked.append(block.ravel())
    return symbols_to_bits(np.concatenate(picked), constellation)
