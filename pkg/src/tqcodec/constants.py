#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

from typing import Dict, Set, Tuple

__all__ = [
    "SERVICE_NAME",
    "DEFAULT_SAMPLE_RATE",
    "DEFAULT_STRIDES",
    "DEFAULT_ENCODER_DIM",
    "DEFAULT_LATENT_DIM",
    "DEFAULT_DECODER_DIM",
    "DEFAULT_NUM_QUANTIZERS",
    "DEFAULT_CODEBOOK_SIZE",
    "SUPPORTED_NUM_QUANTIZERS",
    "DAC_CODE_DIM",
    "MODES",
    "MODE_IDS",
    "NUM_BANDS",
    "CORE_BANDS",
    "SIDE_LATENT_DIM",
    "SUBBAND_STRIDES",
    "SIDE_BAND_SCALE",
    "PQMF_TAPS",
    "PQMF_KAISER_BETA",
    "MAGNITUDE_FLOOR",
    "LSD_WINDOW",
    "LSD_HOP",
    "LSD_SPLIT_HZ",
    "LSD_MID_BAND_HZ",
    "MEL_LOSS_WINDOWS",
    "MEL_LOSS_BINS",
    "MEL_LOG_EPS",
    "SNR_CAP_DB",
    "DECODE_BUDGET_GMACS",
    "KMEANS_MAX_ITERS",
    "KMEANS_TOLERANCE",
    "SIMVQ_RIDGE",
    "DEFAULT_SEED",
    "WEIGHTS_MAGIC",
    "WEIGHTS_VERSION",
    "BITSTREAM_MAGIC",
    "BITSTREAM_VERSION",
    "WAV_SUBTYPES",
]

SERVICE_NAME: str = "tqcodec"

DEFAULT_SAMPLE_RATE: int = 44100

# 3 encoder blocks / 3 decoder blocks, total stride 64
DEFAULT_STRIDES: Tuple[int, ...] = (2, 4, 8)

DEFAULT_ENCODER_DIM: int = 64

DEFAULT_LATENT_DIM: int = 128

DEFAULT_DECODER_DIM: int = 128

DEFAULT_NUM_QUANTIZERS: int = 5

DEFAULT_CODEBOOK_SIZE: int = 512

SUPPORTED_NUM_QUANTIZERS: Set[int] = frozenset({5, 10, 20})

# code space of the factorized (DAC-style) lookup
DAC_CODE_DIM: int = 8

MODES: Tuple[str, ...] = ("seanet", "pqmf_direct", "subband_seanet")

MODE_IDS: Dict[str, int] = {name: index for index, name in enumerate(MODES)}

NUM_BANDS: int = 16

CORE_BANDS: int = 12

SIDE_LATENT_DIM: int = 6

SUBBAND_STRIDES: Tuple[int, ...] = (2, 2)

SIDE_BAND_SCALE: float = 0.5

PQMF_TAPS: int = 481

# about 135 dB stopband, so low tones leave the side bands silent
PQMF_KAISER_BETA: float = 14.0

MAGNITUDE_FLOOR: float = 1e-10

LSD_WINDOW: int = 2048

LSD_HOP: int = 512

LSD_SPLIT_HZ: float = 16000.0

LSD_MID_BAND_HZ: Tuple[float, float] = (3000.0, 8000.0)

MEL_LOSS_WINDOWS: Tuple[int, ...] = (32, 64, 128, 256, 512, 1024, 2048)

MEL_LOSS_BINS: Tuple[int, ...] = (5, 10, 20, 40, 80, 160, 320)

MEL_LOG_EPS: float = 1e-5

SNR_CAP_DB: float = 200.0

# decode-side ceiling, giga multiply-accumulates per second of audio
DECODE_BUDGET_GMACS: float = 10.0

KMEANS_MAX_ITERS: int = 50

KMEANS_TOLERANCE: float = 1e-6

SIMVQ_RIDGE: float = 1e-6

DEFAULT_SEED: int = 0

WEIGHTS_MAGIC: bytes = b"TQCW"

WEIGHTS_VERSION: int = 1

BITSTREAM_MAGIC: bytes = b"TQC1"

BITSTREAM_VERSION: int = 1

WAV_SUBTYPES: Dict[str, str] = {
    "16": "PCM_16",
    "24": "PCM_24",
    "f32": "FLOAT",
}
