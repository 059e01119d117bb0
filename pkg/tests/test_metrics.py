#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

import math

import numpy as np
import pytest
from scipy import signal

from tqcodec.audio import AudioBuffer
from tqcodec.exceptions import ContractError, MetricError, UndefinedReferenceError
from tqcodec.metrics import TABLE_HEADER, band_lsd, evaluate, lsd, si_snr, snr


def _scaled(buf, factor):
    return AudioBuffer(buf.samples * factor, buf.sample_rate)


def _lowpass(buf, cutoff):
    sos = signal.butter(8, cutoff, fs=buf.sample_rate, output="sos")
    return AudioBuffer(signal.sosfilt(sos, buf.samples, axis=1), buf.sample_rate)


def test_identical_inputs_have_zero_lsd(music):
    report = lsd(music, music)
    assert report.lsd == report.lsd_low == report.lsd_high == 0.0


def test_tenfold_gain_is_two_decades(noise):
    report = lsd(_scaled(noise, 10.0), noise)
    assert report.lsd == pytest.approx(2.0, abs=1e-9)
    assert report.lsd_low == pytest.approx(2.0, abs=1e-9)
    assert report.lsd_high == pytest.approx(2.0, abs=1e-9)


def test_lowpass_damage_lands_in_high_band(noise):
    report = lsd(_lowpass(noise, 12000.0), noise)
    assert report.lsd_high > report.lsd_low
    assert report.lsd_high > 1.0


def test_bin_partition(noise):
    report = lsd(noise, _scaled(noise, 0.5))
    assert report.profile.shape == (1025,)
    # bins k * 44100 / 2048 below 16 kHz
    assert report.low_bins == 744


def test_recompute_matches_report(music, noise):
    degraded = AudioBuffer(music.samples[:, : noise.num_samples] + 0.01 * noise.samples)
    reference = AudioBuffer(music.samples[:, : noise.num_samples])
    report = lsd(degraded, reference)
    total, low, high = report.recompute()
    assert total == pytest.approx(report.lsd, abs=1e-12)
    assert low == pytest.approx(report.lsd_low, abs=1e-12)
    assert high == pytest.approx(report.lsd_high, abs=1e-12)


def test_stereo_lsd_is_channel_mean(noise):
    reference = AudioBuffer(np.vstack([noise.samples, noise.samples]))
    degraded = AudioBuffer(reference.samples * np.array([[2.0], [1.0]]))
    report = lsd(degraded, reference)
    assert report.lsd == pytest.approx(math.log10(4.0) / 2, abs=1e-9)


def test_mid_band_matches_band_lsd(music, noise):
    reference = AudioBuffer(music.samples[:, : noise.num_samples])
    degraded = AudioBuffer(reference.samples + 0.01 * noise.samples)
    report = lsd(degraded, reference)
    assert report.lsd_mid == pytest.approx(band_lsd(degraded, reference, 3000, 8000), abs=1e-12)
    with pytest.raises(ContractError):
        band_lsd(degraded, reference, 8000, 3000)
    with pytest.raises(MetricError):
        band_lsd(degraded, reference, 30000, 40000)


def test_snr_of_ten_percent_error(noise):
    estimate = _scaled(noise, 1.1)
    assert snr(estimate, noise) == pytest.approx(20.0, abs=1e-9)


def test_snr_is_capped(music):
    assert snr(music, music) == 200.0


def test_doubled_estimate_is_zero_db(music):
    assert snr(_scaled(music, 2.0), music) == pytest.approx(0.0, abs=1e-9)


def test_si_snr_ignores_scale(music):
    assert si_snr(_scaled(music, 2.0), music) == 200.0


def test_zero_reference(noise):
    silence = AudioBuffer(np.zeros_like(noise.samples))
    with pytest.raises(UndefinedReferenceError):
        snr(noise, silence)
    report = evaluate(noise, silence)
    assert report.snr is None
    assert report.to_row().endswith(",")
    assert "snr: undefined" in report.to_text()


def test_evaluate_fills_snr(noise):
    report = evaluate(_scaled(noise, 1.1), noise)
    assert report.snr == pytest.approx(20.0, abs=1e-9)
    assert len(report.to_row().split(",")) == len(TABLE_HEADER.split(","))
    assert report.to_dict()["log_base"] == 10


def test_rate_mismatch(noise):
    other = AudioBuffer(noise.samples, 48000)
    with pytest.raises(ContractError, match="resample externally"):
        lsd(other, noise)


def test_length_mismatch(noise):
    with pytest.raises(ContractError):
        snr(AudioBuffer(noise.samples[:, :-1]), noise)


def test_input_shorter_than_window():
    short = AudioBuffer(np.ones(1000))
    with pytest.raises(MetricError):
        lsd(short, short)
