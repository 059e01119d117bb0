#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pytest

from tests.oracles import naive_forward, traced_receptive_field
from tqcodec.analyzer import (
    budget_table,
    compare_budget,
    count_macs,
    preset_rows,
    preset_table,
    receptive_field,
    subband_budget,
)
from tqcodec.config import CodecConfig, preset
from tqcodec.exceptions import AnalysisError
from tqcodec.network.builders import (
    build_codec_graph,
    build_dac_decoder,
    build_dac_encoder,
    build_decoder,
    build_encoder,
)
from tqcodec.network.graph import Conv1d, Elu, Lstm, NetworkGraph, Residual, TransposedConv1d
from tqcodec.network.weights import init_weights

SINGLE_CONV = NetworkGraph("single", 1, (Conv1d("c", 1, 1, 7),))

TWO_LAYER = NetworkGraph("pair", 1, (Conv1d("a", 1, 4, 3, stride=2), Conv1d("b", 4, 1, 3)))

DILATED = NetworkGraph(
    "dilated",
    2,
    (
        Residual("r", (Elu("r.act"), Conv1d("r.conv", 2, 2, 7, dilation=3))),
        Conv1d("down", 2, 2, 4, stride=2),
    ),
)

UPSAMPLING = NetworkGraph("up", 2, (TransposedConv1d("t", 2, 2, 4, stride=2), Conv1d("c", 2, 1, 3)))

RECURRENT = NetworkGraph(
    "recurrent",
    2,
    (Conv1d("in", 2, 3, 3, stride=2), Lstm("lstm", 3, 4, num_layers=2), Conv1d("out", 4, 1, 1)),
)

NARROW = CodecConfig(encoder_dim=8, latent_dim=8, decoder_dim=8)

SMALL_ENCODER = build_encoder(NARROW, strides=(2, 2))

SMALL_DECODER = build_decoder(NARROW, strides=(2, 2))


@dataclass(frozen=True)
class Gelu:
    name: str
    kind: str = field(default="gelu", init=False)


@pytest.mark.parametrize(
    "graph, rate, length, expected",
    [(SINGLE_CONV, 44100, 44100, 308700), (TWO_LAYER, 1000, 1000, 12000)],
)
def test_macs_match_naive_count(graph, rate, length, expected):
    report = count_macs(graph, rate)
    assert report.total_macs == expected
    _, counted = naive_forward(graph, init_weights(graph), np.zeros((1, length)))
    assert counted == expected


@pytest.mark.parametrize(
    "graph, length",
    [
        (SINGLE_CONV, 48),
        (TWO_LAYER, 48),
        (DILATED, 48),
        (UPSAMPLING, 24),
        (RECURRENT, 48),
        (SMALL_ENCODER, 48),
        (SMALL_DECODER, 12),
    ],
    ids=lambda value: value.name if isinstance(value, NetworkGraph) else str(value),
)
def test_macs_match_naive_count_per_topology(graph, length):
    # one second of input at a rate equal to the length, divisible by every stride
    report = count_macs(graph, length)
    _, counted = naive_forward(
        graph, init_weights(graph, seed=5), np.zeros((graph.in_channels, length))
    )
    assert report.total_macs == counted


def test_per_layer_rows():
    report = count_macs(TWO_LAYER, 1000)
    assert [(row.name, row.rate, row.macs) for row in report.rows] == [
        ("a", Fraction(500), 6000.0),
        ("b", Fraction(500), 6000.0),
    ]
    assert [row.cumulative_rf for row in report.rows] == [3, 7]
    assert "total" in report.to_table()
    assert report.to_dict()["receptive_field"] == 7


@pytest.mark.parametrize("graph", [SINGLE_CONV, TWO_LAYER, DILATED, UPSAMPLING])
def test_receptive_field_matches_impulse_trace(graph):
    traced = traced_receptive_field(graph, init_weights(graph, seed=3), 48)
    assert receptive_field(graph) == traced


def test_small_receptive_fields():
    assert receptive_field(SINGLE_CONV) == 7
    assert receptive_field(TWO_LAYER) == 7
    assert receptive_field(DILATED) == 22


def test_default_encoder_and_decoder_budgets():
    cfg = CodecConfig()
    encoder = count_macs(build_encoder(cfg), cfg.sample_rate)
    decoder = count_macs(build_decoder(cfg), cfg.frame_rate)
    assert 7.0 <= encoder.gmacs <= 11.0
    assert 4.0 <= decoder.gmacs <= 10.0
    assert encoder.stateful and decoder.stateful


def test_imbalanced_preset_widens_only_the_encoder():
    cfg, wide = CodecConfig(), preset("tqcodec-imbalanced")
    encoder = count_macs(build_encoder(cfg), cfg.sample_rate)
    wide_encoder = count_macs(build_encoder(wide), wide.sample_rate)
    # doubled widths scale every channel product by four, except the mono input and latent convs
    assert 3.5 <= wide_encoder.gmacs / encoder.gmacs <= 4.0
    assert 28.0 <= wide_encoder.gmacs <= 44.0
    decoder = count_macs(build_decoder(cfg), cfg.frame_rate)
    assert count_macs(build_decoder(wide), wide.frame_rate).total_macs == decoder.total_macs


def test_codec_receptive_field():
    assert receptive_field(build_codec_graph(CodecConfig())) <= 4000


def test_baseline_receptive_field():
    graph = build_dac_encoder().then(build_dac_decoder(), name="dac")
    assert 17000 <= receptive_field(graph) <= 18000


def test_budget_verdicts():
    cfg = CodecConfig()
    reports = [
        count_macs(build_encoder(cfg), cfg.sample_rate),
        count_macs(build_decoder(cfg), cfg.frame_rate),
        count_macs(build_dac_decoder(), Fraction(44100, 512)),
        count_macs(NetworkGraph("empty", 1, ()), 44100),
    ]
    verdicts = compare_budget(reports)
    assert [v.status for v in verdicts] == ["exempt", "pass", "fail", "pass"]
    assert not verdicts[2].passed
    assert verdicts[3].gmacs == 0.0
    assert "fail" in budget_table(verdicts)


def test_reduced_width_baseline_decoder_passes():
    report = count_macs(build_dac_decoder(dim=128), Fraction(44100, 512))
    assert compare_budget([report])[0].passed


def test_unknown_layer_is_rejected():
    graph = NetworkGraph("g", 1, (Conv1d("c", 1, 1, 3),))
    object.__setattr__(graph, "layers", (Gelu("odd"),))
    with pytest.raises(AnalysisError):
        count_macs(graph, 44100)


def test_side_networks_are_cheap():
    budget = subband_budget(CodecConfig(mode="subband_seanet"))
    assert len(budget.core) == 2
    assert len(budget.side) == 8
    assert 0.0 < budget.side_ratio <= 0.05


def test_preset_rows():
    rows = {row["preset"]: row for row in preset_rows()}
    assert rows["tqcodec-32k"]["bitrate"] == 31007
    assert rows["tqcodec-64k"]["bitrate"] == 62015
    assert rows["tqcodec-128k"]["bitrate"] == 124031
    assert rows["tqcodec-32k"]["frame_rate"] == 689
    assert rows["dac-44k"]["frame_rate"] == 86
    assert rows["dac-44k"]["bitrate"] == 15503
    assert rows["encodec-24k"]["bitrate"] == 12000
    assert "tqcodec-subband" in preset_table()
