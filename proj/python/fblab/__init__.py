"""Finite-blocklength coding laboratory.

Thin Python facade over the C++ core: theory curves, the AWGN channel,
Gray QAM, polar and Reed-Muller baselines, and the convolutional
autoencoder with its Monte-Carlo evaluation harness.
"""

from ._core import (  # noqa: F401
    AeConfig,
    AeModel,
    FepReport,
    PolarCode,
    QamSpec,
    RmCode,
    TrainConfig,
    __version__,
    bhattacharyya_z,
    capacity,
    derive_config,
    dispersion,
    estimate_ae_fep,
    estimate_qam_bit_error_rate,
    load_checkpoint,
    max_rate_fbl,
    normalize_power,
    polar_encode,
    q_func,
    q_inv,
    qam_demodulate_hard,
    qam_modulate,
    rm_decode_reed,
    rm_encode,
    save_checkpoint,
    sc_decode,
    set_threads,
    train,
    transmit,
)

__all__ = [
    "AeConfig",
    "AeModel",
    "FepReport",
    "PolarCode",
    "QamSpec",
    "RmCode",
    "TrainConfig",
    "bhattacharyya_z",
    "capacity",
    "derive_config",
    "dispersion",
    "estimate_ae_fep",
    "estimate_qam_bit_error_rate",
    "load_checkpoint",
    "max_rate_fbl",
    "normalize_power",
    "polar_encode",
    "q_func",
    "q_inv",
    "qam_demodulate_hard",
    "qam_modulate",
    "rm_decode_reed",
    "rm_encode",
    "save_checkpoint",
    "sc_decode",
    "set_threads",
    "train",
    "transmit",
]
