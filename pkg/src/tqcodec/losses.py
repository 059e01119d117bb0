#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Generator-side reconstruction losses and their weighting.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .audio import AudioBuffer
from .constants import MEL_LOG_EPS, MEL_LOSS_BINS, MEL_LOSS_WINDOWS
from .exceptions import ContractError, EmptySpectrogramError, MetricError
from .quantizer.residual import QuantizerReport
from .spectral import mel_filterbank, mel_project, stft

__all__ = [
    "LossWeights",
    "CompositeReport",
    "multiscale_mel_loss",
    "waveform_loss",
    "composite_report",
]

# terms that only exist with a discriminator
NOT_APPLICABLE = ("feature_match", "adversarial")


@dataclass(frozen=True)
class LossWeights:
    mel: float = 15.0
    waveform: float = 1.0
    feature_match: float = 2.0
    adversarial: float = 1.0
    codebook: float = 1.0
    commitment: float = 0.25

    def to_dict(self) -> Dict[str, float]:
        return {
            "mel": self.mel,
            "waveform": self.waveform,
            "feature_match": self.feature_match,
            "adversarial": self.adversarial,
            "codebook": self.codebook,
            "commitment": self.commitment,
        }


@dataclass(frozen=True)
class CompositeReport:
    components: Dict[str, float]
    weights: LossWeights = LossWeights()

    @property
    def weighted(self) -> Dict[str, float]:
        factors = self.weights.to_dict()
        return {name: factors[name] * value for name, value in self.components.items()}

    @property
    def total(self) -> float:
        return float(sum(self.weighted.values()))

    def to_dict(self) -> Dict[str, object]:
        breakdown: Dict[str, object] = {}
        for name, factor in self.weights.to_dict().items():
            if name in NOT_APPLICABLE:
                breakdown[name] = {"weight": factor, "value": "n/a"}
            else:
                breakdown[name] = {
                    "weight": factor,
                    "value": self.components.get(name, 0.0),
                    "weighted": self.weighted.get(name, 0.0),
                }
        breakdown["total"] = self.total
        return breakdown


def _check_pair(x: AudioBuffer, y: AudioBuffer) -> None:
    if x.sample_rate != y.sample_rate or x.samples.shape != y.samples.shape:
        raise ContractError(
            f"inputs differ: {x.samples.shape} @ {x.sample_rate} Hz "
            f"vs {y.samples.shape} @ {y.sample_rate} Hz"
        )


def multiscale_mel_loss(
    x: AudioBuffer,
    y: AudioBuffer,
    windows: Sequence[int] = MEL_LOSS_WINDOWS,
    mel_bins: Sequence[int] = MEL_LOSS_BINS,
    eps: float = MEL_LOG_EPS,
) -> float:
    """
    Sum over scales of L1(mel) + L1(log(mel + eps)), hop = window / 4, channels averaged
    """
    _check_pair(x, y)
    if len(windows) != len(mel_bins):
        raise ContractError("one mel bin count is needed per window size")

    total = 0.0
    for channel in range(x.num_channels):
        for window, bins in zip(windows, mel_bins):
            fb = mel_filterbank(x.sample_rate, window, bins)
            try:
                mx = mel_project(stft(x, window, window // 4, channel), fb)
                my = mel_project(stft(y, window, window // 4, channel), fb)
            except EmptySpectrogramError as error:
                raise MetricError(f"mel loss at window {window}: {error}")
            total += float(np.mean(np.abs(mx - my)))
            total += float(np.mean(np.abs(np.log(mx + eps) - np.log(my + eps))))
    return total / x.num_channels


def waveform_loss(x: AudioBuffer, y: AudioBuffer) -> float:
    """
    Mean absolute sample difference
    """
    _check_pair(x, y)
    return float(np.mean(np.abs(x.samples - y.samples)))


def composite_report(
    x: AudioBuffer,
    y: AudioBuffer,
    diagnostics: Optional[QuantizerReport] = None,
    weights: LossWeights = LossWeights(),
) -> CompositeReport:
    components = {
        "mel": multiscale_mel_loss(x, y),
        "waveform": waveform_loss(x, y),
        "codebook": diagnostics.codebook_loss if diagnostics else 0.0,
        "commitment": diagnostics.commitment_loss if diagnostics else 0.0,
    }
    return CompositeReport(components, weights)
