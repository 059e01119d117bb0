#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Pseudo quadrature mirror filterbank: cosine-modulated Kaiser prototype.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math
from typing import Tuple

from aws_lambda_powertools import Logger
import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import freqz, upfirdn
from scipy.signal.windows import kaiser

from .audio import AudioBuffer
from .constants import NUM_BANDS, PQMF_KAISER_BETA, PQMF_TAPS, SERVICE_NAME
from .exceptions import ContractError, FilterDesignError

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = [
    "PqmfBank",
    "SubbandSignal",
    "design_prototype",
    "design_pqmf",
    "default_bank",
    "analyze",
    "synthesize",
    "aligned_round_trip",
]

METHODS = ("polyphase", "direct")


@dataclass(frozen=True)
class SubbandSignal:
    """
    Critically decimated bands, shape [num_bands, ceil(T / num_bands)], band 0 lowest
    """

    bands: np.ndarray
    sample_rate: int

    @property
    def num_bands(self) -> int:
        return self.bands.shape[0]

    @property
    def band_length(self) -> int:
        return self.bands.shape[1]

    @property
    def sample_rate_per_band(self) -> Fraction:
        return Fraction(self.sample_rate, self.num_bands)

    def scaled(self, gain: float) -> "SubbandSignal":
        return SubbandSignal(self.bands * gain, self.sample_rate)


@dataclass(frozen=True)
class PqmfBank:
    num_bands: int
    prototype: np.ndarray
    analysis_filters: np.ndarray
    synthesis_filters: np.ndarray
    cutoff_ratio: float
    beta: float

    @property
    def taps(self) -> int:
        return self.prototype.shape[0]

    @property
    def group_delay(self) -> int:
        """
        Analysis plus synthesis delay in samples
        """
        return self.taps - 1

    def impulse_errors(self) -> np.ndarray:
        """
        Energy of (round trip - delayed impulse) for an impulse at each decimation phase
        """
        return _impulse_errors(self.analysis_filters, self.synthesis_filters)

    def reconstruction_error_db(self) -> float:
        return float(10.0 * np.log10(max(self.impulse_errors().max(), 1e-300)))

    def frequency_response(self, band: int, worN: int = 8192) -> Tuple[np.ndarray, np.ndarray]:
        """
        Normalized frequency (0..1 = 0..Nyquist) and magnitude of one analysis filter
        """
        w, h = freqz(self.analysis_filters[band], worN=worN)
        return w / np.pi, np.abs(h)


def design_prototype(taps: int, cutoff_ratio: float, beta: float = PQMF_KAISER_BETA) -> np.ndarray:
    """
    Kaiser-windowed sinc lowpass with cutoff `cutoff_ratio` * pi, unity DC gain
    """
    n = np.arange(taps) - (taps - 1) / 2.0
    omega_c = np.pi * cutoff_ratio
    with np.errstate(invalid="ignore", divide="ignore"):
        ideal = np.sin(omega_c * n) / (np.pi * n)
    ideal[(taps - 1) // 2] = cutoff_ratio
    return ideal * kaiser(taps, beta)


def _modulate(prototype: np.ndarray, num_bands: int) -> Tuple[np.ndarray, np.ndarray]:
    taps = prototype.shape[0]
    n = np.arange(taps) - (taps - 1) / 2.0
    k = np.arange(num_bands)[:, np.newaxis]
    argument = (2 * k + 1) * (np.pi / (2 * num_bands)) * n
    phase = (-1.0) ** k * np.pi / 4
    analysis = 2.0 * prototype * np.cos(argument + phase)
    synthesis = 2.0 * prototype * np.cos(argument - phase)
    return analysis, synthesis


def _analyze_bands(filters: np.ndarray, signal: np.ndarray, method: str) -> np.ndarray:
    num_bands = filters.shape[0]
    length = -(-signal.shape[0] // num_bands)
    if method == "direct":
        return np.stack([np.convolve(signal, h)[::num_bands][:length] for h in filters])
    return np.stack([upfirdn(h, signal, up=1, down=num_bands)[:length] for h in filters])


def _synthesize_bands(filters: np.ndarray, bands: np.ndarray, method: str) -> np.ndarray:
    num_bands, length = bands.shape
    total = length * num_bands
    out = np.zeros(total)
    if method == "direct":
        for f, band in zip(filters, bands):
            upsampled = np.zeros(total)
            upsampled[::num_bands] = band
            out += np.convolve(upsampled, f)[:total]
    else:
        for f, band in zip(filters, bands):
            out += upfirdn(f, band, up=num_bands)[:total]
    return out * num_bands


def _impulse_errors(analysis: np.ndarray, synthesis: np.ndarray) -> np.ndarray:
    num_bands, taps = analysis.shape
    length = 2 * taps + 2 * num_bands
    delay = taps - 1
    errors = np.empty(num_bands)
    for phase in range(num_bands):
        impulse = np.zeros(length)
        impulse[phase] = 1.0
        bands = _analyze_bands(analysis, impulse, "polyphase")
        out = _synthesize_bands(synthesis, bands, "polyphase")
        target = np.zeros_like(out)
        target[phase + delay] = 1.0
        errors[phase] = np.sum((out - target) ** 2)
    return errors


def design_pqmf(
    num_bands: int = NUM_BANDS, taps: int = PQMF_TAPS, beta: float = PQMF_KAISER_BETA
) -> PqmfBank:
    """
    Design an M-band PQMF whose prototype cutoff minimizes impulse round-trip error

    The cutoff is searched over [0.5, 1.5] / (2M) with a bounded scalar search.
    """
    if num_bands < 2 or num_bands & (num_bands - 1):
        raise FilterDesignError(f"num_bands must be a power of two >= 2, got {num_bands}")
    if taps % 2 == 0:
        raise FilterDesignError(f"taps must be odd, got {taps}")
    if taps < 8 * num_bands:
        raise FilterDesignError(f"{taps} taps is too short for {num_bands} bands")

    def objective(cutoff: float) -> float:
        analysis, synthesis = _modulate(design_prototype(taps, cutoff, beta), num_bands)
        return float(np.mean(_impulse_errors(analysis, synthesis)))

    nominal = 1.0 / (2 * num_bands)
    result = minimize_scalar(
        objective,
        bounds=(0.5 * nominal, 1.5 * nominal),
        method="bounded",
        options={"xatol": 1e-8},
    )
    cutoff = float(result.x)

    prototype = design_prototype(taps, cutoff, beta)
    analysis, synthesis = _modulate(prototype, num_bands)
    bank = PqmfBank(num_bands, prototype, analysis, synthesis, cutoff, beta)

    logger.debug(
        "Designed PQMF",
        num_bands=num_bands,
        taps=taps,
        cutoff_ratio=cutoff,
        reconstruction_error_db=bank.reconstruction_error_db(),
    )
    return bank


@lru_cache(maxsize=8)
def default_bank(num_bands: int = NUM_BANDS, taps: int = PQMF_TAPS) -> PqmfBank:
    return design_pqmf(num_bands, taps)


def analyze(bank: PqmfBank, buf: AudioBuffer, method: str = "polyphase") -> SubbandSignal:
    """
    Filter with each analysis filter and decimate by M
    """
    if method not in METHODS:
        raise ContractError(f"unknown filtering method '{method}'")
    if buf.num_channels != 1:
        raise ContractError(f"analyze expects mono input, got {buf.num_channels} channels")
    if buf.num_samples < bank.taps:
        raise ContractError(f"input of {buf.num_samples} samples is shorter than {bank.taps} taps")
    bands = _analyze_bands(bank.analysis_filters, buf.samples[0], method)
    return SubbandSignal(bands, buf.sample_rate)


def synthesize(bank: PqmfBank, sb: SubbandSignal, method: str = "polyphase") -> AudioBuffer:
    """
    Upsample each band by M, filter, sum and scale by M

    The output lags the analyzed input by `bank.group_delay` samples.
    """
    if method not in METHODS:
        raise ContractError(f"unknown filtering method '{method}'")
    if sb.num_bands != bank.num_bands:
        raise ContractError(f"bank has {bank.num_bands} bands, signal has {sb.num_bands}")
    return AudioBuffer(_synthesize_bands(bank.synthesis_filters, sb.bands, method), sb.sample_rate)


def aligned_round_trip(bank: PqmfBank, buf: AudioBuffer, method: str = "polyphase") -> AudioBuffer:
    """
    analyze then synthesize with tail padding and delay compensation; same length as input
    """
    padded_length = math.ceil((buf.num_samples + bank.group_delay) / bank.num_bands)
    padded = np.zeros(padded_length * bank.num_bands)
    padded[: buf.num_samples] = buf.samples[0]
    out = synthesize(bank, analyze(bank, AudioBuffer(padded, buf.sample_rate), method), method)
    delay = bank.group_delay
    return AudioBuffer(out.samples[:, delay : delay + buf.num_samples], buf.sample_rate)
