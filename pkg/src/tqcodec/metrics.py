#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Objective quality metrics. Argument order is (estimate, reference) throughout.
*
* LSD: Hann STFT 2048/512 without centering, X = log10(max(|STFT|^2, 1e-10)), per frame the RMS
* over bins, averaged over frames. LSD-L covers bins below 16 kHz, LSD-H the rest.
"""

from dataclasses import dataclass, field, replace
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from .audio import AudioBuffer
from .constants import (
    LSD_HOP,
    LSD_MID_BAND_HZ,
    LSD_SPLIT_HZ,
    LSD_WINDOW,
    MAGNITUDE_FLOOR,
    SNR_CAP_DB,
)
from .exceptions import ContractError, EmptySpectrogramError, MetricError, UndefinedReferenceError
from .spectral import log_power, stft

__all__ = [
    "MetricReport",
    "TABLE_HEADER",
    "lsd",
    "band_lsd",
    "snr",
    "si_snr",
    "evaluate",
]

TABLE_HEADER = "lsd,lsd_low,lsd_high,lsd_mid,snr"


@dataclass(frozen=True, eq=False)
class MetricReport:
    lsd: float
    lsd_low: float
    lsd_high: float
    lsd_mid: float
    # mean squared log-power difference per STFT bin
    profile: np.ndarray = field(repr=False)
    # squared log-power differences summed over the low / high bins, [channels, frames]
    low_sums: np.ndarray = field(repr=False)
    high_sums: np.ndarray = field(repr=False)
    low_bins: int = 0
    snr: Optional[float] = None
    window_size: int = LSD_WINDOW
    hop: int = LSD_HOP
    split_hz: float = LSD_SPLIT_HZ

    def recompute(self) -> Tuple[float, float, float]:
        """
        (lsd, lsd_low, lsd_high) from the stored per-frame sums
        """
        high_bins = self.profile.shape[0] - self.low_bins
        total = np.sqrt((self.low_sums + self.high_sums) / self.profile.shape[0])
        low = np.sqrt(self.low_sums / self.low_bins) if self.low_bins else None
        high = np.sqrt(self.high_sums / high_bins) if high_bins else None
        return (
            float(total.mean(axis=1).mean()),
            float(low.mean(axis=1).mean()) if low is not None else math.nan,
            float(high.mean(axis=1).mean()) if high is not None else math.nan,
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "lsd": self.lsd,
            "lsd_low": self.lsd_low,
            "lsd_high": self.lsd_high,
            "lsd_mid": self.lsd_mid,
            "snr": self.snr,
            "stft_window": self.window_size,
            "stft_hop": self.hop,
            "stft_window_fn": "hann",
            "log_base": 10,
            "magnitude_floor": MAGNITUDE_FLOOR,
            "split_hz": self.split_hz,
            "snr_cap_db": SNR_CAP_DB,
        }

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if value is None:
                value = "undefined"
            elif isinstance(value, float):
                value = f"{value:.6f}"
            lines.append(f"{key}: {value}")
        return "\n".join(lines)

    def to_row(self) -> str:
        values = [self.lsd, self.lsd_low, self.lsd_high, self.lsd_mid, self.snr]
        return ",".join("" if v is None else f"{v:.6f}" for v in values)


def _check_pair(x: AudioBuffer, y: AudioBuffer) -> None:
    if x.sample_rate != y.sample_rate:
        raise ContractError(
            f"sample rates differ ({x.sample_rate} vs {y.sample_rate}); resample externally"
        )
    if x.samples.shape != y.samples.shape:
        raise ContractError(f"shape mismatch {x.samples.shape} vs {y.samples.shape}")


def _log_difference(x: AudioBuffer, y: AudioBuffer, channel: int) -> Tuple[np.ndarray, np.ndarray]:
    try:
        sx = stft(x, LSD_WINDOW, LSD_HOP, channel)
        sy = stft(y, LSD_WINDOW, LSD_HOP, channel)
    except EmptySpectrogramError as error:
        raise MetricError(f"cannot compute LSD: {error}")
    return log_power(sx) - log_power(sy), sx.bin_frequencies()


def _rms_over(squared: np.ndarray, mask: np.ndarray) -> float:
    if not mask.any():
        return math.nan
    return float(np.mean(np.sqrt(squared[:, mask].mean(axis=1))))


def lsd(x: AudioBuffer, y: AudioBuffer) -> MetricReport:
    """
    Log-spectral distance with the low / high partition at 16 kHz; stereo is the channel mean
    """
    _check_pair(x, y)
    lsd_values, low_values, high_values, mid_values = [], [], [], []
    profiles, low_sums, high_sums = [], [], []
    low_bins = 0
    for channel in range(x.num_channels):
        difference, freqs = _log_difference(x, y, channel)
        squared = difference**2
        low = freqs < LSD_SPLIT_HZ
        mid = (freqs >= LSD_MID_BAND_HZ[0]) & (freqs < LSD_MID_BAND_HZ[1])
        low_bins = int(low.sum())

        lsd_values.append(_rms_over(squared, np.ones_like(low)))
        low_values.append(_rms_over(squared, low))
        high_values.append(_rms_over(squared, ~low))
        mid_values.append(_rms_over(squared, mid))
        profiles.append(squared.mean(axis=0))
        low_sums.append(squared[:, low].sum(axis=1))
        high_sums.append(squared[:, ~low].sum(axis=1))

    return MetricReport(
        lsd=float(np.mean(lsd_values)),
        lsd_low=float(np.mean(low_values)),
        lsd_high=float(np.mean(high_values)),
        lsd_mid=float(np.mean(mid_values)),
        profile=np.mean(profiles, axis=0),
        low_sums=np.stack(low_sums),
        high_sums=np.stack(high_sums),
        low_bins=low_bins,
    )


def band_lsd(x: AudioBuffer, y: AudioBuffer, fmin: float, fmax: float) -> float:
    """
    LSD over bins with fmin <= frequency < fmax
    """
    _check_pair(x, y)
    if fmin >= fmax:
        raise ContractError(f"empty band [{fmin}, {fmax})")
    values = []
    for channel in range(x.num_channels):
        difference, freqs = _log_difference(x, y, channel)
        values.append(_rms_over(difference**2, (freqs >= fmin) & (freqs < fmax)))
    if any(math.isnan(v) for v in values):
        raise MetricError(f"no STFT bins fall inside [{fmin}, {fmax}) Hz")
    return float(np.mean(values))


def _ratio_db(signal_energy: float, noise_energy: float) -> float:
    if noise_energy <= 0.0:
        return SNR_CAP_DB
    return min(SNR_CAP_DB, 10.0 * math.log10(signal_energy / noise_energy))


def snr(x: AudioBuffer, y: AudioBuffer) -> float:
    """
    10 log10(sum y^2 / sum (x - y)^2) with reference y, capped at 200 dB
    """
    _check_pair(x, y)
    values: List[float] = []
    for est, ref in zip(x.samples, y.samples):
        energy = float(np.sum(ref**2))
        if energy <= 0.0:
            raise UndefinedReferenceError("SNR is undefined for an all-zero reference")
        values.append(_ratio_db(energy, float(np.sum((est - ref) ** 2))))
    return float(np.mean(values))


def si_snr(x: AudioBuffer, y: AudioBuffer) -> float:
    """
    Scale-invariant SNR: x is projected onto the reference before measuring the residual
    """
    _check_pair(x, y)
    values: List[float] = []
    for est, ref in zip(x.samples, y.samples):
        energy = float(np.dot(ref, ref))
        if energy <= 0.0:
            raise UndefinedReferenceError("SI-SNR is undefined for an all-zero reference")
        target = np.dot(est, ref) / energy * ref
        values.append(_ratio_db(float(np.dot(target, target)), float(np.sum((est - target) ** 2))))
    return float(np.mean(values))


def evaluate(x: AudioBuffer, y: AudioBuffer) -> MetricReport:
    """
    LSD family plus SNR; SNR is left undefined for an all-zero reference
    """
    report = lsd(x, y)
    try:
        return replace(report, snr=snr(x, y))
    except UndefinedReferenceError:
        return report
