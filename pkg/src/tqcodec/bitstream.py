#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* "TQC1" stream: fixed little-endian header, then per channel the codebook indices
* frame-major and stage-minor, MSB-first at codebook_bits each, padded to a byte boundary.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import struct
from typing import List, Sequence, Tuple

import numpy as np

from .config import CodecConfig
from .constants import BITSTREAM_MAGIC, BITSTREAM_VERSION, MODE_IDS, MODES
from .exceptions import BitstreamParseError, BitstreamRangeError, ContractError
from .sequences import CodeSequence

__all__ = [
    "BitstreamHeader",
    "HEADER_SIZE",
    "pack",
    "unpack",
    "bitrate_for",
    "frame_rate_for",
    "payload_bytes_for",
    "measured_bitrate",
]

_HEADER = struct.Struct("<4sBIBBBBHII")

HEADER_SIZE = _HEADER.size


@dataclass(frozen=True)
class BitstreamHeader:
    sample_rate: int
    channels: int
    mode: str
    num_quantizers: int
    codebook_bits: int
    total_stride: int
    original_length: int
    frame_count: int
    version: int = BITSTREAM_VERSION

    def __post_init__(self) -> None:
        if self.mode not in MODE_IDS:
            raise ContractError(f"unknown mode '{self.mode}'")
        limits = {
            "sample_rate": 0xFFFFFFFF,
            "channels": 0xFF,
            "num_quantizers": 0xFF,
            "codebook_bits": 32,
            "total_stride": 0xFFFF,
            "original_length": 0xFFFFFFFF,
            "frame_count": 0xFFFFFFFF,
        }
        for name, limit in limits.items():
            value = getattr(self, name)
            if not 0 <= value <= limit:
                raise BitstreamRangeError(f"{name}={value} does not fit the header field")
        if min(self.channels, self.num_quantizers, self.codebook_bits, self.total_stride) < 1:
            raise ContractError("channel, stage, bit and stride counts must be positive")
        if self.frame_count * self.total_stride < self.original_length:
            raise ContractError(
                f"{self.frame_count} frames of {self.total_stride} samples "
                f"cannot hold {self.original_length} samples"
            )

    @property
    def frame_rate(self) -> Fraction:
        return Fraction(self.sample_rate, self.total_stride)

    @property
    def channel_payload_bytes(self) -> int:
        return payload_bytes_for(self.frame_count, self.num_quantizers, self.codebook_bits)

    def to_bytes(self) -> bytes:
        return _HEADER.pack(
            BITSTREAM_MAGIC,
            self.version,
            self.sample_rate,
            self.channels,
            MODE_IDS[self.mode],
            self.num_quantizers,
            self.codebook_bits,
            self.total_stride,
            self.original_length,
            self.frame_count,
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitstreamHeader":
        if len(data) < HEADER_SIZE:
            raise BitstreamParseError(
                f"stream of {len(data)} bytes is shorter than the {HEADER_SIZE}-byte header",
                offset=len(data),
            )
        fields = _HEADER.unpack_from(data, 0)
        magic, version, sample_rate, channels, mode, nq, bits, stride, length, frames = fields
        if magic != BITSTREAM_MAGIC:
            raise BitstreamParseError(f"bad magic {magic!r}", offset=0)
        if version != BITSTREAM_VERSION:
            raise BitstreamParseError(f"unsupported stream version {version}", offset=4)
        if mode >= len(MODES):
            raise BitstreamParseError(f"unknown mode id {mode}", offset=10)
        try:
            return cls(sample_rate, channels, MODES[mode], nq, bits, stride, length, frames)
        except (ContractError, BitstreamRangeError) as error:
            raise BitstreamParseError(f"inconsistent header: {error}", offset=0)


def payload_bytes_for(frame_count: int, num_quantizers: int, codebook_bits: int) -> int:
    return -(-frame_count * num_quantizers * codebook_bits // 8)


def _pack_channel(indices: np.ndarray, bits: int) -> bytes:
    flat = indices.reshape(-1).astype(np.uint64)
    shifts = np.arange(bits - 1, -1, -1, dtype=np.uint64)
    bitplanes = ((flat[:, np.newaxis] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bitplanes.reshape(-1)).tobytes()


def _unpack_channel(payload: bytes, count: int, bits: int) -> np.ndarray:
    bitplanes = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))[: count * bits]
    weights = np.left_shift(np.int64(1), np.arange(bits - 1, -1, -1, dtype=np.int64))
    return bitplanes.reshape(count, bits).astype(np.int64) @ weights


def pack(header: BitstreamHeader, codes: Sequence[CodeSequence]) -> bytes:
    if len(codes) != header.channels:
        raise ContractError(f"header declares {header.channels} channels, got {len(codes)}")

    chunks = [header.to_bytes()]
    for channel, sequence in enumerate(codes):
        expected = (header.frame_count, header.num_quantizers)
        if sequence.indices.shape != expected:
            raise ContractError(
                f"channel {channel} codes have shape {sequence.indices.shape}, expected {expected}"
            )
        if sequence.indices.size and sequence.indices.max() >= 1 << header.codebook_bits:
            raise BitstreamRangeError(
                f"channel {channel}: index {int(sequence.indices.max())} "
                f"needs more than {header.codebook_bits} bits"
            )
        chunks.append(_pack_channel(sequence.indices, header.codebook_bits))
    return b"".join(chunks)


def unpack(data: bytes) -> Tuple[BitstreamHeader, List[CodeSequence]]:
    header = BitstreamHeader.from_bytes(data)
    size = header.channel_payload_bytes
    count = header.frame_count * header.num_quantizers

    codes: List[CodeSequence] = []
    offset = HEADER_SIZE
    for channel in range(header.channels):
        if offset + size > len(data):
            raise BitstreamParseError(
                f"channel {channel} payload needs {size} bytes, {len(data) - offset} remain",
                offset=offset,
            )
        indices = _unpack_channel(data[offset : offset + size], count, header.codebook_bits)
        codes.append(
            CodeSequence(
                indices.reshape(header.frame_count, header.num_quantizers), header.frame_rate
            )
        )
        offset += size

    if offset != len(data):
        raise BitstreamParseError(f"{len(data) - offset} trailing bytes", offset=offset)
    return header, codes


def frame_rate_for(cfg: CodecConfig) -> Fraction:
    """
    Exact latent frames per second; the floor is the conventionally reported value
    """
    return Fraction(cfg.sample_rate, cfg.total_stride)


def bitrate_for(cfg: CodecConfig) -> int:
    """
    Bits per second per channel, floored
    """
    return math.floor(frame_rate_for(cfg) * cfg.num_quantizers * cfg.codebook_bits)


def measured_bitrate(data: bytes) -> float:
    """
    Per-channel payload bits divided by the coded duration
    """
    header = BitstreamHeader.from_bytes(data)
    if header.original_length == 0:
        return 0.0
    payload_bits = 8 * (len(data) - HEADER_SIZE) / header.channels
    return payload_bits * header.sample_rate / header.original_length
