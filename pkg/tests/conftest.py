#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

from pathlib import Path

import numpy as np
import pytest

from tqcodec.audio import AudioBuffer, save_wav
from tqcodec.config import CodecConfig
from tqcodec.fixtures import synthetic_music, white_noise


@pytest.fixture(scope="session")
def music() -> AudioBuffer:
    return synthetic_music(2.0, seed=7)


@pytest.fixture(scope="session")
def stereo_music() -> AudioBuffer:
    return synthetic_music(1.0, seed=11, channels=2)


@pytest.fixture(scope="session")
def noise() -> AudioBuffer:
    return white_noise(1.0, seed=3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_cfg() -> CodecConfig:
    """
    Default strides with narrow layers so full encode/decode runs in tests
    """
    return CodecConfig(encoder_dim=8, latent_dim=8, decoder_dim=8, codebook_size=16)


@pytest.fixture
def small_subband_cfg(small_cfg) -> CodecConfig:
    return small_cfg.replace(mode="subband_seanet")


@pytest.fixture
def direct_cfg(small_cfg) -> CodecConfig:
    return small_cfg.replace(mode="pqmf_direct")


@pytest.fixture
def wav_file(tmp_path: Path, music: AudioBuffer) -> Path:
    path = tmp_path / "music.wav"
    save_wav(music, path, "f32")
    return path


@pytest.fixture
def corpus_dir(tmp_path: Path) -> Path:
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for seed in range(2):
        save_wav(synthetic_music(1.0, seed=100 + seed), corpus / f"clip{seed}.wav", "f32")
    return corpus
