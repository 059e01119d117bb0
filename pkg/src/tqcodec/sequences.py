#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Frame sequences exchanged between networks, quantizers and the bitstream.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from .exceptions import ContractError

__all__ = ["LatentSequence", "CodeSequence"]


@dataclass(frozen=True)
class LatentSequence:
    """
    Real frames, shape [T_f, D]
    """

    frames: np.ndarray
    frame_rate: Fraction

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2:
            raise ContractError(f"latent frames must be [T_f, D], got shape {frames.shape}")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "frame_rate", Fraction(self.frame_rate))

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    @classmethod
    def from_channels_first(cls, x: np.ndarray, frame_rate: Fraction) -> "LatentSequence":
        """
        Wrap network output [D, T_f]
        """
        return cls(np.ascontiguousarray(np.asarray(x).T), frame_rate)

    def channels_first(self) -> np.ndarray:
        return np.ascontiguousarray(self.frames.T)

    def split(self, sizes: Sequence[int]) -> List["LatentSequence"]:
        if sum(sizes) != self.dim:
            raise ContractError(f"split sizes {list(sizes)} do not sum to dimension {self.dim}")
        bounds = np.cumsum([0, *sizes])
        return [
            LatentSequence(self.frames[:, lo:hi], self.frame_rate)
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]

    @classmethod
    def concat(cls, parts: Sequence["LatentSequence"]) -> "LatentSequence":
        lengths = {part.num_frames for part in parts}
        rates = {part.frame_rate for part in parts}
        if len(lengths) != 1 or len(rates) != 1:
            raise ContractError(f"cannot concatenate latents with frames {lengths}, rates {rates}")
        return cls(np.concatenate([part.frames for part in parts], axis=1), parts[0].frame_rate)


@dataclass(frozen=True)
class CodeSequence:
    """
    Codebook indices, shape [T_f, Nq], stage-minor
    """

    indices: np.ndarray
    frame_rate: Fraction

    def __post_init__(self) -> None:
        indices = np.asarray(self.indices)
        if indices.ndim != 2:
            raise ContractError(f"codes must be [T_f, Nq], got shape {indices.shape}")
        if indices.size and (not np.issubdtype(indices.dtype, np.integer) or indices.min() < 0):
            raise ContractError("codes must be non-negative integers")
        object.__setattr__(self, "indices", indices.astype(np.int64))
        object.__setattr__(self, "frame_rate", Fraction(self.frame_rate))

    @property
    def num_frames(self) -> int:
        return self.indices.shape[0]

    @property
    def num_quantizers(self) -> int:
        return self.indices.shape[1]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CodeSequence)
            and self.frame_rate == other.frame_rate
            and np.array_equal(self.indices, other.indices)
        )
