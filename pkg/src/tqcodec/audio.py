#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Planar audio container and RIFF/WAV input/output.
"""

from dataclasses import dataclass
import os
from pathlib import Path
import struct
from typing import List, Sequence, Union

from aws_lambda_powertools import Logger
import numpy as np
import soundfile as sf

from .constants import DEFAULT_SAMPLE_RATE, SERVICE_NAME, WAV_SUBTYPES
from .exceptions import ContractError, WavFormatError, WavParseError

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = ["AudioBuffer", "load_wav", "save_wav"]

PathLike = Union[str, os.PathLike]


@dataclass(frozen=True)
class AudioBuffer:
    """
    Planar multi-channel samples, shape [channels, samples]
    """

    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise ContractError(f"expected [channels, samples], got shape {samples.shape}")
        if self.sample_rate <= 0:
            raise ContractError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_channels(
        cls, channels: Sequence[np.ndarray], sample_rate: int = DEFAULT_SAMPLE_RATE
    ) -> "AudioBuffer":
        lengths = {len(channel) for channel in channels}
        if len(lengths) != 1:
            raise ContractError(f"channels have unequal lengths: {sorted(lengths)}")
        return cls(np.stack([np.asarray(c, dtype=np.float64) for c in channels]), sample_rate)

    @property
    def num_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    def mono(self, channel: int = 0) -> "AudioBuffer":
        return AudioBuffer(self.samples[channel : channel + 1], self.sample_rate)

    def channels(self) -> List["AudioBuffer"]:
        return [self.mono(c) for c in range(self.num_channels)]

    def scaled(self, gain: float) -> "AudioBuffer":
        return AudioBuffer(self.samples * gain, self.sample_rate)


def _check_riff(path: Path) -> None:
    """
    Walk the RIFF chunks and reject a data chunk that runs past the end of the file
    """
    size = path.stat().st_size
    with open(path, "rb") as handle:
        header = handle.read(12)
        if len(header) < 12:
            raise WavParseError(f"{path}: file shorter than a RIFF header")
        riff, _, wave = struct.unpack("<4sI4s", header)
        if riff != b"RIFF" or wave != b"WAVE":
            raise WavFormatError(f"{path}: not a RIFF/WAVE file")

        offset = 12
        while offset + 8 <= size:
            handle.seek(offset)
            chunk_id, chunk_size = struct.unpack("<4sI", handle.read(8))
            if chunk_id == b"data":
                if offset + 8 + chunk_size > size:
                    raise WavParseError(
                        f"{path}: data chunk declares {chunk_size} bytes, "
                        f"only {size - offset - 8} present"
                    )
                return
            offset += 8 + chunk_size + (chunk_size & 1)
    raise WavParseError(f"{path}: no data chunk")


def load_wav(path: PathLike) -> AudioBuffer:
    """
    Read a PCM16, PCM24 or IEEE float32 WAV file into [-1, 1] planar samples
    """
    path = Path(path)
    _check_riff(path)

    try:
        info = sf.info(str(path))
    except (RuntimeError, sf.LibsndfileError) as error:
        raise WavParseError(f"{path}: {error}")

    if info.subtype not in WAV_SUBTYPES.values():
        raise WavFormatError(f"{path}: unsupported encoding {info.subtype}")

    try:
        # PCM is normalized by 2^(bits-1), so -32768 maps to -1.0 exactly
        data, sample_rate = sf.read(str(path), dtype="float64", always_2d=True)
    except (RuntimeError, sf.LibsndfileError) as error:
        raise WavParseError(f"{path}: {error}")

    logger.debug(
        f"Loaded {path.name}",
        channels=info.channels,
        sample_rate=sample_rate,
        frames=data.shape[0],
        subtype=info.subtype,
    )
    return AudioBuffer(np.ascontiguousarray(data.T), int(sample_rate))


def save_wav(buf: AudioBuffer, path: PathLike, bit_depth: str = "16") -> None:
    """
    Write planar samples as PCM16, PCM24 or float32 WAV

    Fixed-point output is rounded to the nearest step of 2^-(bits-1), so a
    load after save differs by at most one LSB.
    """
    bit_depth = str(bit_depth)
    if bit_depth not in WAV_SUBTYPES:
        raise WavFormatError(f"unsupported bit depth {bit_depth}, expected {list(WAV_SUBTYPES)}")
    if not np.all(np.isfinite(buf.samples)):
        raise ContractError("cannot write non-finite samples")

    frames = buf.samples.T
    if bit_depth == "16":
        data = np.clip(np.round(frames * 32768.0), -32768, 32767).astype(np.int16)
    elif bit_depth == "24":
        # libsndfile keeps the top 24 bits of an int32 sample
        steps = np.clip(np.round(frames * 8388608.0), -8388608, 8388607).astype(np.int64)
        data = (steps * 256).astype(np.int32)
    else:
        data = frames.astype(np.float32)

    try:
        sf.write(str(path), data, buf.sample_rate, subtype=WAV_SUBTYPES[bit_depth], format="WAV")
    except (RuntimeError, sf.LibsndfileError) as error:
        logger.exception(f"Unable to write {path}")
        raise OSError(f"unable to write {path}: {error}") from error
