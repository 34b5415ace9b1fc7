"""Transforms, modem and constellation tests against brute-force oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otfs_rc.ddcore import (
    BPSK,
    QPSK,
    WaveformConfig,
    demodulate,
    get_constellation,
    isfft,
    map_bits,
    modulate,
    quantize,
    sfft,
    symbols_to_bits,
)


# ---------------------------------------------------------------------------
# oracles: direct double sums, written before the fast implementations

def oracle_isfft(dd):
    m, n = dd.shape
    out = np.zeros((m, n), dtype=complex)
    for p in range(m):
        for q in range(n):
            acc = 0.0 + 0.0j
            for l in range(m):
                for k in range(n):
                    acc += dd[l, k] * np.exp(2j * np.pi * q * k / n) \
                        * np.exp(-2j * np.pi * p * l / m)
            out[p, q] = acc
    return out / np.sqrt(m * n)


def oracle_sfft(tf):
    m, n = tf.shape
    out = np.zeros((m, n), dtype=complex)
    for l in range(m):
        for k in range(n):
            acc = 0.0 + 0.0j
            for p in range(m):
                for q in range(n):
                    acc += tf[p, q] * np.exp(-2j * np.pi * q * k / n) \
                        * np.exp(2j * np.pi * p * l / m)
            out[l, k] = acc
    return out / np.sqrt(m * n)


def oracle_modulate(dd, cfg):
    # per-symbol m-point inverse DFT of the time-frequency grid, rectangular pulse
    m, n = dd.shape
    tf = oracle_isfft(dd)
    delay_time = np.zeros((m, n), dtype=complex)
    for sym in range(n):
        for s in range(m):
            acc = 0.0 + 0.0j
            for p in range(m):
                acc += tf[p, sym] * np.exp(2j * np.pi * p * s / m)
            delay_time[s, sym] = acc / np.sqrt(m)
    if cfg.frame_structure == "overlay":
        blocks = []
        for sym in range(n):
            col = delay_time[:, sym]
            if cfg.cp_len:
                blocks.append(col[-cfg.cp_len:])
            blocks.append(col)
        return np.concatenate(blocks)
    core = delay_time.T.reshape(-1)
    if cfg.cp_len:
        return np.concatenate([core[-cfg.cp_len:], core])
    return core


def random_frame(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


# ---------------------------------------------------------------------------
# transforms

def test_isfft_matches_oracle():
    rng = np.random.default_rng(0)
    for m, n in [(2, 2), (4, 3), (8, 4)]:
        x = random_frame(rng, m, n)
        got = isfft(x)
        want = oracle_isfft(x)
        assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-12


def test_sfft_matches_oracle():
    rng = np.random.default_rng(1)
    for m, n in [(2, 2), (4, 3), (8, 4)]:
        x = random_frame(rng, m, n)
        got = sfft(x)
        want = oracle_sfft(x)
        assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-12


def test_transforms_are_inverse_pair():
    rng = np.random.default_rng(2)
    x = random_frame(rng, 64, 14)
    assert np.allclose(sfft(isfft(x)), x, atol=1e-12)
    assert np.allclose(isfft(sfft(x)), x, atol=1e-12)


def test_transforms_are_unitary():
    rng = np.random.default_rng(3)
    x = random_frame(rng, 32, 12)
    assert np.isclose(np.linalg.norm(isfft(x)), np.linalg.norm(x))
    assert np.isclose(np.linalg.norm(sfft(x)), np.linalg.norm(x))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_inverse_pair_property(m, n, seed):
    x = random_frame(np.random.default_rng(seed), m, n)
    assert np.allclose(sfft(isfft(x)), x, atol=1e-10)


def test_transform_energy_conservation_on_basis():
    # a single delay-Doppler impulse spreads to a full unit-modulus grid
    e = np.zeros((8, 4), dtype=complex)
    e[3, 1] = 1.0
    tf = isfft(e)
    assert np.allclose(np.abs(tf), 1.0 / np.sqrt(32))


def test_grid_shape_validation():
    with pytest.raises(ValueError):
        isfft(np.zeros(8))
    cfg = WaveformConfig(m=8, n=4)
    with pytest.raises(ValueError):
        isfft(np.zeros((4, 8)), cfg)


# ---------------------------------------------------------------------------
# modem

@pytest.mark.parametrize("structure,cp", [("standalone", 0), ("standalone", 5),
                                          ("overlay", 0), ("overlay", 3)])
def test_modulate_matches_oracle(structure, cp):
    rng = np.random.default_rng(4)
    cfg = WaveformConfig(m=8, n=4, cp_len=cp, frame_structure=structure)
    x = random_frame(rng, 8, 4)
    got = modulate(x, cfg)
    want = oracle_modulate(x, cfg)
    assert got.shape == (cfg.frame_len,)
    assert np.max(np.abs(got - want)) < 1e-12 * np.max(np.abs(want))


@pytest.mark.parametrize("structure,cp", [("standalone", 0), ("standalone", 6),
                                          ("overlay", 0), ("overlay", 4)])
def test_modem_round_trip(structure, cp):
    rng = np.random.default_rng(5)
    cfg = WaveformConfig(m=64, n=14, cp_len=cp, frame_structure=structure)
    x = random_frame(rng, 64, 14)
    assert np.allclose(demodulate(modulate(x, cfg), cfg), x, atol=1e-12)


def test_demodulate_length_check():
    cfg = WaveformConfig(m=8, n=4, cp_len=2)
    with pytest.raises(ValueError):
        demodulate(np.zeros(10, dtype=complex), cfg)


def test_waveform_config_validation():
    with pytest.raises(ValueError):
        WaveformConfig(m=0, n=4)
    with pytest.raises(ValueError):
        WaveformConfig(m=8, n=4, cp_len=8)
    with pytest.raises(ValueError):
        WaveformConfig(m=8, n=4, frame_structure="bogus")
    with pytest.raises(ValueError):
        WaveformConfig(m=8, n=4, delta_f=0.0)


def test_waveform_derived_quantities():
    cfg = WaveformConfig(m=64, n=14, delta_f=15e3, cp_len=4, frame_structure="overlay")
    assert cfg.sample_rate == 64 * 15e3
    assert np.isclose(cfg.delta_t * cfg.delta_f, 1.0)
    assert cfg.frame_len == 14 * 68
    assert np.isclose(cfg.symbol_spacing, 68 / cfg.sample_rate)
    solo = WaveformConfig(m=64, n=14, cp_len=4)
    assert solo.frame_len == 4 + 64 * 14
    assert np.isclose(solo.symbol_spacing, solo.delta_t)


# ---------------------------------------------------------------------------
# constellations

def test_builtin_alphabets():
    assert BPSK.bits_per_symbol == 1
    assert QPSK.bits_per_symbol == 2
    assert np.isclose(QPSK.mean_energy, 2.0)
    assert get_constellation("QPSK") is QPSK
    with pytest.raises(ValueError):
        get_constellation("256qam")


def test_qpsk_gray_labelling():
    # nearest neighbours differ in exactly one bit
    pts = QPSK.point_array
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            if np.isclose(np.abs(pts[i] - pts[j]), 2.0):  # adjacent, not diagonal
                assert bin(i ^ j).count("1") == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 50))
def test_bit_mapping_round_trip(seed, n_sym):
    rng = np.random.default_rng(seed)
    for const in (BPSK, QPSK):
        bits = rng.integers(0, 2, n_sym * const.bits_per_symbol)
        syms = map_bits(bits, const)
        assert np.array_equal(symbols_to_bits(syms, const), bits)


def test_map_bits_validation():
    with pytest.raises(ValueError):
        map_bits(np.array([0, 1, 1]), QPSK)  # odd count
    with pytest.raises(ValueError):
        map_bits(np.array([0, 2]), QPSK)


def test_quantize_snaps_to_nearest():
    vals = np.array([[1.1 + 0.9j, -0.2 - 3.0j]])
    got = quantize(vals, QPSK)
    assert np.array_equal(got, np.array([[1 + 1j, -1 - 1j]]))


def test_quantize_is_idempotent_and_shape_preserving():
    rng = np.random.default_rng(6)
    vals = random_frame(rng, 5, 7)
    q = quantize(vals, QPSK)
    assert q.shape == vals.shape
    assert np.array_equal(quantize(q, QPSK), q)
    assert np.isin(q, QPSK.point_array).all()


def test_quantize_recovers_perturbed_symbols():
    rng = np.random.default_rng(7)
    bits = rng.integers(0, 2, 400)
    syms = map_bits(bits, QPSK)
    noisy = syms + 0.3 * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
    # perturbation below half the minimum distance cannot flip a decision
    safe = np.abs(noisy - syms) < 1.0
    assert np.array_equal(quantize(noisy, QPSK)[safe], syms[safe])
