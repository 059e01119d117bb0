#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* CodecConfig: single source of truth for bitrate, MAC and receptive-field arithmetic.
"""

from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
import math
import os
from pathlib import Path
import tomllib
from typing import Any, Dict, Mapping, Optional, Tuple

from aws_lambda_powertools import Logger

from .constants import (
    CORE_BANDS,
    DAC_CODE_DIM,
    DEFAULT_CODEBOOK_SIZE,
    DEFAULT_DECODER_DIM,
    DEFAULT_ENCODER_DIM,
    DEFAULT_LATENT_DIM,
    DEFAULT_NUM_QUANTIZERS,
    DEFAULT_SAMPLE_RATE,
    DEFAULT_SEED,
    DEFAULT_STRIDES,
    MODES,
    NUM_BANDS,
    PQMF_TAPS,
    SERVICE_NAME,
    SIDE_BAND_SCALE,
    SIDE_LATENT_DIM,
    SUBBAND_STRIDES,
    SUPPORTED_NUM_QUANTIZERS,
)
from .exceptions import ConfigError

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = ["CodecConfig", "PRESETS", "QUANTIZER_KINDS", "load_config", "preset"]

QUANTIZER_KINDS: Tuple[str, ...] = ("rvq", "dac", "simvq")

ENV_PREFIX = "TQCODEC_"


@dataclass(frozen=True)
class CodecConfig:
    sample_rate: int = DEFAULT_SAMPLE_RATE
    strides: Tuple[int, ...] = DEFAULT_STRIDES
    encoder_dim: int = DEFAULT_ENCODER_DIM
    latent_dim: int = DEFAULT_LATENT_DIM
    decoder_dim: int = DEFAULT_DECODER_DIM
    num_quantizers: int = DEFAULT_NUM_QUANTIZERS
    codebook_size: int = DEFAULT_CODEBOOK_SIZE
    mode: str = "seanet"
    side_band_latent: int = SIDE_LATENT_DIM
    core_bands: int = CORE_BANDS
    num_bands: int = NUM_BANDS
    subband_strides: Tuple[int, ...] = SUBBAND_STRIDES
    side_band_scale: float = SIDE_BAND_SCALE
    pqmf_taps: int = PQMF_TAPS
    quantizer: str = "rvq"
    code_dim: int = DAC_CODE_DIM
    residual_compress: int = 1
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        object.__setattr__(self, "strides", tuple(int(s) for s in self.strides))
        object.__setattr__(self, "subband_strides", tuple(int(s) for s in self.subband_strides))

        if self.sample_rate <= 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        if any(s < 1 for s in self.strides) or any(s < 1 for s in self.subband_strides):
            raise ConfigError("strides must be positive integers")
        if self.codebook_size < 1 or self.codebook_size & (self.codebook_size - 1):
            raise ConfigError(f"codebook_size must be a power of two, got {self.codebook_size}")
        if self.num_quantizers < 1:
            raise ConfigError("num_quantizers must be at least 1")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode '{self.mode}', expected one of {MODES}")
        if self.quantizer not in QUANTIZER_KINDS:
            raise ConfigError(
                f"unknown quantizer '{self.quantizer}', expected one of {QUANTIZER_KINDS}"
            )
        if not 0 < self.core_bands <= self.num_bands:
            raise ConfigError("core_bands must be within [1, num_bands]")
        if self.num_bands < 2 or self.num_bands & (self.num_bands - 1):
            raise ConfigError("num_bands must be a power of two >= 2")
        if min(self.encoder_dim, self.latent_dim, self.decoder_dim) < 1:
            raise ConfigError("network dimensions must be positive")
        if self.side_band_scale <= 0:
            raise ConfigError("side_band_scale must be positive")

    @property
    def side_bands(self) -> int:
        return self.num_bands - self.core_bands

    @property
    def frame_stack(self) -> int:
        """
        Subband samples per band gathered into one frame in the subband modes
        """
        return math.prod(self.subband_strides)

    @property
    def total_stride(self) -> int:
        """
        Input samples per latent frame
        """
        if self.mode == "seanet":
            return math.prod(self.strides)
        return self.num_bands * self.frame_stack

    @property
    def codebook_bits(self) -> int:
        return self.codebook_size.bit_length() - 1

    @property
    def frame_rate(self) -> Fraction:
        return Fraction(self.sample_rate, self.total_stride)

    @property
    def quantizer_dim(self) -> int:
        """
        Dimension of the vectors handed to the residual quantizer
        """
        if self.mode == "seanet":
            return self.latent_dim
        if self.mode == "subband_seanet":
            return self.latent_dim + self.side_bands * self.side_band_latent
        return self.num_bands * self.frame_stack

    def replace(self, **overrides: Any) -> "CodecConfig":
        return replace(self, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        resolved = asdict(self)
        resolved.update(
            total_stride=self.total_stride,
            codebook_bits=self.codebook_bits,
            frame_rate=float(self.frame_rate),
            quantizer_dim=self.quantizer_dim,
        )
        return resolved


PRESETS: Dict[str, Dict[str, Any]] = {
    "tqcodec-32k": {"num_quantizers": 5},
    "tqcodec-64k": {"num_quantizers": 10},
    "tqcodec-128k": {"num_quantizers": 20},
    "tqcodec-imbalanced": {"encoder_dim": 2 * DEFAULT_ENCODER_DIM},
    "tqcodec-subband": {"mode": "subband_seanet"},
    "dac-44k": {
        "strides": (2, 4, 8, 8),
        "latent_dim": 1024,
        "decoder_dim": 1536,
        "num_quantizers": 18,
        "codebook_size": 1024,
        "quantizer": "dac",
    },
    "encodec-24k": {
        "sample_rate": 24000,
        "strides": (2, 4, 5, 8),
        "encoder_dim": 32,
        "num_quantizers": 16,
        "codebook_size": 1024,
    },
    "encodec-48k": {
        "sample_rate": 48000,
        "strides": (2, 4, 5, 8),
        "encoder_dim": 32,
        "num_quantizers": 16,
        "codebook_size": 1024,
    },
}


def preset(name: str) -> CodecConfig:
    try:
        return CodecConfig(**PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset '{name}', expected one of {sorted(PRESETS)}")


def _coerce(name: str, value: Any) -> Any:
    kind = {f.name: f.type for f in fields(CodecConfig)}.get(name)
    if kind is None:
        raise ConfigError(f"unknown configuration key '{name}'")
    if isinstance(value, str):
        if "Tuple" in str(kind):
            return tuple(int(v) for v in value.replace("[", "").replace("]", "").split(",") if v)
        if kind in (int, "int"):
            return int(value)
        if kind in (float, "float"):
            return float(value)
    if "Tuple" in str(kind):
        return tuple(int(v) for v in value)
    return value


def _from_file(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "rb") as handle:
            document = tomllib.load(handle)
    except (OSError, tomllib.TOMLDecodeError) as error:
        raise ConfigError(f"unable to read config {path}: {error}")

    values: Dict[str, Any] = {}
    for key, value in document.items():
        # [codec], [quantizer], [subband] sections are flattened
        if isinstance(value, dict):
            values.update(value)
        else:
            values[key] = value
    return values


def _from_env(environ: Mapping[str, str]) -> Dict[str, Any]:
    names = {f.name for f in fields(CodecConfig)}
    return {
        key[len(ENV_PREFIX) :].lower(): value
        for key, value in environ.items()
        if key.startswith(ENV_PREFIX) and key[len(ENV_PREFIX) :].lower() in names
    }


def load_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
    base: Optional[CodecConfig] = None,
) -> CodecConfig:
    """
    Resolve a CodecConfig: defaults, then config file, then environment, then overrides
    """
    values: Dict[str, Any] = {}
    if path is not None:
        values.update(_from_file(Path(path)))
    values.update(_from_env(os.environ if environ is None else environ))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    resolved = {name: _coerce(name, value) for name, value in values.items()}
    config = (base or CodecConfig()).replace(**resolved)

    if config.num_quantizers not in SUPPORTED_NUM_QUANTIZERS:
        logger.warning(
            "Quantizer count outside the published configurations",
            num_quantizers=config.num_quantizers,
        )
    return config
