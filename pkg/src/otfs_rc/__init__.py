"""Link-level OTFS simulation and equalization toolkit.

Modules:

* ``ddcore``: delay-Doppler/time-frequency transforms, modulation, constellations
* ``channel``: path models, delay-Doppler kernels, time-domain propagation, noise
* ``pilots``: pilot patterns, frame assembly, training-set extraction
* ``esn``: echo-state reservoirs, delay-searched ridge readouts, detection
* ``equalizers``: reservoir equalizers and classical baselines
* ``harness``: experiment configs, Monte-Carlo sweeps, CSV/plot output
"""

from .ddcore import (
    BPSK,
    QPSK,
    Constellation,
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
from .channel import (
    ChannelGenerator,
    MimoChannel,
    Path,
    PathList,
    add_awgn,
    apply_dd_kernel,
    apply_mimo_kernel,
    apply_mimo_tdl,
    apply_tdl,
    kernel_from_paths,
    noise_variance,
)
from .pilots import (
    INTERLEAVED,
    SUPERIMPOSED,
    FrameDataset,
    PilotPattern,
    build_interleaved,
    build_superimposed,
    extract_datasets,
    make_pattern,
    pilot_symbols,
    stack_mimo,
    superimposed_pilot_phases,
)
from .esn import ReadoutWeights, Reservoir, ReservoirConfig, train_with_delay_search
from .equalizers import (
    DD_MMSE_PERFECT_CSI,
    EQUALIZER_KINDS,
    RC_INTERLEAVED,
    RC_SUPERIMPOSED,
    TF_LMMSE_ESTIMATED,
    EqualizeResult,
    EqualizerSpec,
    ber,
    data_bits,
    dd_mmse_perfect_csi,
    equalize_frame,
    tf_lmmse_estimated,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ResultRecord,
    config_from_dict,
    load_config,
    read_csv,
    run_sweep,
    write_csv,
)

__version__ = "0.1.0"
