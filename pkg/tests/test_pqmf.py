#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

import numpy as np
import pytest

from tqcodec import pqmf
from tqcodec.audio import AudioBuffer
from tqcodec.exceptions import ContractError, FilterDesignError
from tqcodec.fixtures import sine
from tqcodec.metrics import snr
from tqcodec.pqmf import (
    SubbandSignal,
    aligned_round_trip,
    analyze,
    default_bank,
    design_pqmf,
    synthesize,
)


@pytest.fixture(scope="module")
def bank():
    return default_bank()


def test_default_design(bank):
    assert bank.num_bands == 16
    assert bank.taps == 481
    assert bank.group_delay == 480
    assert bank.reconstruction_error_db() < -40.0


@pytest.mark.parametrize("source", ["music", "noise"])
def test_round_trip_reconstruction(bank, source, request):
    buf = request.getfixturevalue(source)
    out = aligned_round_trip(bank, buf)
    assert out.num_samples == buf.num_samples
    assert snr(out, buf) >= 40.0


def test_polyphase_matches_direct_form(bank, noise):
    buf = AudioBuffer(noise.samples[:, :8000], noise.sample_rate)
    fast = analyze(bank, buf, "polyphase")
    slow = analyze(bank, buf, "direct")
    np.testing.assert_allclose(fast.bands, slow.bands, rtol=0, atol=1e-12)
    np.testing.assert_allclose(
        synthesize(bank, fast, "polyphase").samples,
        synthesize(bank, fast, "direct").samples,
        rtol=0,
        atol=1e-12,
    )


def test_band_length_and_rate(bank, music):
    sb = analyze(bank, AudioBuffer(music.samples[:, :1000], 44100))
    assert sb.band_length == 63
    assert sb.sample_rate_per_band == 44100 / 16


@pytest.mark.parametrize("band", [0, 3, 11, 15])
def test_band_centre_sine_stays_in_its_band(bank, band):
    frequency = (band + 0.5) * 44100 / 32
    sb = analyze(bank, sine(frequency, 0.25))
    energy = np.sum(sb.bands[:, 40:] ** 2, axis=1)
    assert energy[band] / energy.sum() >= 0.9


def test_band_edge_sine_reconstructs(bank):
    buf = sine(4 * 44100 / 32, 0.5, fade=0.01)
    assert snr(aligned_round_trip(bank, buf), buf) >= 35.0


@pytest.mark.parametrize("band", [0, 7, 15])
def test_stopband_attenuation(bank, band):
    freqs, magnitude = bank.frequency_response(band)
    peak = magnitude.max()
    outside = (freqs < (band - 1) / 16) | (freqs > (band + 2) / 16)
    assert 20 * np.log10(magnitude[outside].max() / peak) <= -40.0


@pytest.mark.parametrize("num_bands, taps", [(1, 481), (12, 481), (16, 480), (16, 63)])
def test_invalid_designs(num_bands, taps):
    with pytest.raises(FilterDesignError):
        design_pqmf(num_bands, taps)


def test_small_bank_reconstructs(noise):
    bank = design_pqmf(4, 129)
    assert snr(aligned_round_trip(bank, noise), noise) >= 40.0


def test_analyze_contracts(bank, stereo_music):
    with pytest.raises(ContractError):
        analyze(bank, stereo_music)
    with pytest.raises(ContractError):
        analyze(bank, AudioBuffer(np.zeros(100)))
    with pytest.raises(ContractError):
        analyze(bank, stereo_music.mono(0), method="fft")


def test_synthesize_band_mismatch(bank):
    with pytest.raises(ContractError):
        synthesize(bank, SubbandSignal(np.zeros((8, 10)), 44100))


def test_public_names_are_exported():
    for name in ("analyze", "synthesize", "aligned_round_trip", "default_bank", "design_pqmf"):
        assert name in pqmf.__all__
        assert callable(getattr(pqmf, name))
