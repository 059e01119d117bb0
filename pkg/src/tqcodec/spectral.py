#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Short-time Fourier transform and mel projection shared by metrics and losses.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from aws_lambda_powertools import Logger
import librosa
import numpy as np

from .audio import AudioBuffer
from .constants import MAGNITUDE_FLOOR, SERVICE_NAME
from .exceptions import ContractError, EmptySpectrogramError

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = ["Spectrogram", "MelFilterbank", "stft", "mel_filterbank", "mel_project", "log_power"]


@dataclass(frozen=True)
class Spectrogram:
    """
    Magnitudes, shape [frames, window_size // 2 + 1]
    """

    magnitudes: np.ndarray
    frame_hop: int
    window_size: int
    sample_rate: int

    @property
    def num_frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def num_bins(self) -> int:
        return self.magnitudes.shape[1]

    def bin_frequencies(self) -> np.ndarray:
        return np.arange(self.num_bins) * self.sample_rate / self.window_size


@dataclass(frozen=True)
class MelFilterbank:
    """
    HTK-scale triangular filters, shape [mel_bins, window_size // 2 + 1]
    """

    weights: np.ndarray
    fmin: float
    fmax: float

    @property
    def mel_bins(self) -> int:
        return self.weights.shape[0]

    @property
    def num_bins(self) -> int:
        return self.weights.shape[1]

    def empty_rows(self) -> np.ndarray:
        return np.flatnonzero(self.weights.sum(axis=1) <= 0.0)

    def validate(self, strict: bool = True) -> None:
        if np.any(self.weights < 0):
            raise ContractError("mel filter weights must be non-negative")
        empty = self.empty_rows()
        if strict and empty.size:
            raise ContractError(f"mel filters {empty.tolist()} have no support on the bin grid")


def stft(buf: AudioBuffer, window_size: int, hop: int, channel: int = 0) -> Spectrogram:
    """
    Hann-windowed magnitude STFT with every frame fully inside the signal
    """
    if window_size < 2 or window_size & (window_size - 1):
        raise ContractError(f"window_size must be a power of two, got {window_size}")
    if not 0 < hop <= window_size:
        raise ContractError(f"hop must be within (0, {window_size}], got {hop}")

    signal = buf.samples[channel]
    if signal.shape[0] < window_size:
        raise EmptySpectrogramError(
            f"signal of {signal.shape[0]} samples is shorter than window {window_size}"
        )

    spectrum = librosa.stft(
        np.ascontiguousarray(signal),
        n_fft=window_size,
        hop_length=hop,
        window="hann",
        center=False,
    )
    return Spectrogram(np.abs(spectrum).T, hop, window_size, buf.sample_rate)


@lru_cache(maxsize=32)
def mel_filterbank(
    sample_rate: int,
    window_size: int,
    mel_bins: int,
    fmin: float = 0.0,
    fmax: Optional[float] = None,
) -> MelFilterbank:
    fmax = sample_rate / 2.0 if fmax is None else fmax
    weights = librosa.filters.mel(
        sr=sample_rate,
        n_fft=window_size,
        n_mels=mel_bins,
        fmin=fmin,
        fmax=fmax,
        htk=True,
        norm=None,
        dtype=np.float64,
    )
    bank = MelFilterbank(weights, fmin, fmax)
    bank.validate(strict=False)
    if bank.empty_rows().size:
        logger.debug(
            "Mel filterbank has empty rows",
            window_size=window_size,
            mel_bins=mel_bins,
            empty=int(bank.empty_rows().size),
        )
    return bank


def mel_project(spec: Spectrogram, fb: MelFilterbank) -> np.ndarray:
    """
    Project magnitudes onto mel filters, shape [frames, mel_bins]
    """
    if fb.num_bins != spec.num_bins:
        raise ContractError(
            f"filterbank expects {fb.num_bins} bins, spectrogram has {spec.num_bins}"
        )
    return spec.magnitudes @ fb.weights.T


def log_power(spec: Spectrogram, floor: float = MAGNITUDE_FLOOR) -> np.ndarray:
    return np.log10(np.maximum(spec.magnitudes**2, floor))
