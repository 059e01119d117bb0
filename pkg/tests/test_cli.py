#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

import json

import pytest

from tqcodec import __version__
from tqcodec.audio import load_wav
from tqcodec.cli import EXIT_CODES, main
from tqcodec.metrics import TABLE_HEADER

SMALL_TOML = """
[codec]
encoder_dim = 8
latent_dim = 8
decoder_dim = 8

[quantizer]
codebook_size = 16
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_TOML)
    return path


@pytest.fixture
def codebooks(tmp_path, config_file, corpus_dir):
    path = tmp_path / "codebooks.tqcw"
    assert main(["--config", str(config_file), "fit", str(corpus_dir), str(path)]) == 0
    return path


def _run(config_file, *argv):
    return main(["--quiet", "--config", str(config_file), *map(str, argv)])


def test_fit_encode_decode(tmp_path, config_file, codebooks, wav_file, music, capsys):
    stream = tmp_path / "music.tqc"
    decoded = tmp_path / "decoded.wav"
    assert _run(config_file, "encode", wav_file, stream, "--codebooks", codebooks) == 0
    assert "bitrate" in capsys.readouterr().out
    assert stream.read_bytes()[:4] == b"TQC1"

    assert _run(config_file, "decode", stream, decoded, "--codebooks", codebooks) == 0
    out = load_wav(decoded)
    assert out.num_samples == music.num_samples
    assert out.sample_rate == 44100


def test_streaming_decode_flag(tmp_path, config_file, codebooks, wav_file):
    stream = tmp_path / "music.tqc"
    decoded = tmp_path / "streamed.wav"
    _run(config_file, "encode", wav_file, stream, "--codebooks", codebooks)
    argv = ["decode", stream, decoded, "--codebooks", codebooks, "--streaming-chunk", 16]
    assert _run(config_file, *argv, "--bit-depth", "f32") == 0
    assert decoded.exists()


def test_encode_json_output(tmp_path, config_file, codebooks, wav_file):
    report = tmp_path / "encode.json"
    argv = ["--json-output", report, "encode", wav_file, tmp_path / "x.tqc"]
    assert _run(config_file, *argv, "--codebooks", codebooks) == 0
    payload = json.loads(report.read_text())
    # 44100 / 64 frames/s x 5 stages x 4 bits
    assert payload["nominal_bitrate"] == 13781
    assert payload["bitrate"] == pytest.approx(13781, rel=0.01)
    assert payload["channels"] == 1


def test_fit_is_reproducible(tmp_path, config_file, corpus_dir):
    first, second = tmp_path / "a.tqcw", tmp_path / "b.tqcw"
    for path in (first, second):
        assert _run(config_file, "--seed", 3, "fit", corpus_dir, path, "--iters", 5) == 0
    assert first.read_bytes() == second.read_bytes()


def test_simvq_fit(tmp_path, config_file, corpus_dir, capsys):
    path = tmp_path / "simvq.tqcw"
    assert _run(config_file, "fit", corpus_dir, path, "--simvq", "--nq", 2, "--iters", 3) == 0
    assert "simvq" in capsys.readouterr().out


def test_metrics_text_and_csv(wav_file, config_file, capsys):
    assert _run(config_file, "metrics", wav_file, wav_file) == 0
    text = capsys.readouterr().out
    assert "lsd: 0.000000" in text
    assert "snr: 200.000000" in text

    assert _run(config_file, "metrics", wav_file, wav_file, "--format", "csv") == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    assert header.startswith(TABLE_HEADER)
    assert row.split(",")[0] == "0.000000"


def test_analyze_presets(capsys):
    assert main(["--quiet", "analyze", "--presets"]) == 0
    out = capsys.readouterr().out
    assert "tqcodec-32k" in out
    assert "31007" in out


def test_analyze_default_codec(tmp_path):
    report = tmp_path / "analyze.json"
    assert main(["--quiet", "--json-output", str(report), "analyze", "--dac"]) == 0
    payload = json.loads(report.read_text())
    statuses = [verdict["status"] for verdict in payload["verdicts"]]
    assert statuses == ["exempt", "pass", "exempt", "fail"]
    assert payload["codec_receptive_field"] <= 4000


def test_analyze_subband(capsys):
    assert main(["--quiet", "--preset", "tqcodec-subband", "analyze", "--layers"]) == 0
    assert "side networks cost" in capsys.readouterr().out


def test_unknown_stream_version(tmp_path, config_file, codebooks, wav_file):
    stream = tmp_path / "music.tqc"
    _run(config_file, "encode", wav_file, stream, "--codebooks", codebooks)
    data = bytearray(stream.read_bytes())
    data[4] = 99
    stream.write_bytes(bytes(data))
    code = _run(config_file, "decode", stream, tmp_path / "x.wav", "--codebooks", codebooks)
    assert code == EXIT_CODES["parse"] == 3


def test_encode_without_codebooks(tmp_path, config_file, wav_file, capsys):
    assert _run(config_file, "encode", wav_file, tmp_path / "x.tqc") == EXIT_CODES["contract"]
    assert "fit" in capsys.readouterr().err


def test_fit_without_wav_files(tmp_path, config_file):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert _run(config_file, "fit", empty, tmp_path / "cb.tqcw") == 4


def test_missing_input_file(tmp_path, config_file):
    code = _run(config_file, "metrics", tmp_path / "nope.wav", tmp_path / "nope.wav")
    assert code == EXIT_CODES["io"]


def test_bad_configuration_key(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[codec]\nfilter_order = 3\n")
    assert main(["--quiet", "--config", str(path), "analyze"]) == EXIT_CODES["usage"]


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out
