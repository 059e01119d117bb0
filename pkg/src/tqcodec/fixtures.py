#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Deterministic synthetic signals for tests and desk-scale corpora.
"""

import numpy as np

from .audio import AudioBuffer
from .constants import DEFAULT_SAMPLE_RATE

__all__ = ["synthetic_music", "white_noise", "sine"]

# A minor pentatonic, MIDI note numbers
SCALE = np.array([57, 60, 62, 64, 67, 69, 72, 74, 76, 79])


def _midi_to_hz(note: np.ndarray) -> np.ndarray:
    return 440.0 * 2.0 ** ((note - 69) / 12.0)


def synthetic_music(
    duration: float,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    seed: int = 0,
    channels: int = 1,
    note_length: float = 0.25,
    amplitude: float = 0.3,
) -> AudioBuffer:
    """
    Melody of harmonic notes over a sustained bass line, decaying envelopes
    """
    rng = np.random.default_rng(seed)
    num_samples = int(round(duration * sample_rate))
    t = np.arange(num_samples) / sample_rate

    out = np.zeros((channels, num_samples))
    note_samples = max(1, int(note_length * sample_rate))
    num_notes = -(-num_samples // note_samples)

    melody = rng.choice(SCALE, size=num_notes)
    bass = rng.choice(SCALE[:4] - 24, size=-(-num_notes // 4))

    for index in range(num_notes):
        start = index * note_samples
        stop = min(num_samples, start + note_samples)
        local = t[start:stop] - t[start]
        envelope = np.exp(-local * 6.0) * np.minimum(1.0, local * 200.0)

        frequency = _midi_to_hz(melody[index])
        bass_frequency = _midi_to_hz(bass[index // 4])
        tone = np.zeros_like(local)
        for harmonic in range(1, 7):
            if harmonic * frequency < sample_rate / 2:
                tone += np.sin(2 * np.pi * harmonic * frequency * t[start:stop]) / harmonic
        low = np.sin(2 * np.pi * bass_frequency * t[start:stop])

        for channel in range(channels):
            pan = 1.0 - 0.3 * channel
            out[channel, start:stop] += amplitude * (pan * envelope * tone + 0.5 * low)

    return AudioBuffer(out, sample_rate)


def white_noise(
    duration: float,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    seed: int = 0,
    amplitude: float = 0.1,
    channels: int = 1,
) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    num_samples = int(round(duration * sample_rate))
    return AudioBuffer(amplitude * rng.standard_normal((channels, num_samples)), sample_rate)


def sine(
    frequency: float,
    duration: float,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    amplitude: float = 0.5,
    phase: float = 0.0,
    fade: float = 0.0,
) -> AudioBuffer:
    """
    Pure tone with an optional raised-cosine fade in and out of `fade` seconds
    """
    num_samples = int(round(duration * sample_rate))
    t = np.arange(num_samples) / sample_rate
    signal = amplitude * np.sin(2 * np.pi * frequency * t + phase)

    fade_samples = int(round(fade * sample_rate))
    if fade_samples:
        ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(fade_samples) / fade_samples)
        signal[:fade_samples] *= ramp
        signal[num_samples - fade_samples :] *= ramp[::-1]
    return AudioBuffer(signal, sample_rate)
