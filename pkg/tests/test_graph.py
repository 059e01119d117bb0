#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

import pytest

from tqcodec.config import CodecConfig
from tqcodec.exceptions import GraphValidationError
from tqcodec.network.builders import (
    build_codec_graph,
    build_dac_decoder,
    build_dac_encoder,
    build_decoder,
    build_encoder,
)
from tqcodec.network.graph import (
    Conv1d,
    Elu,
    Lstm,
    NetworkGraph,
    Residual,
    Tanh,
    TransposedConv1d,
)


def _top(graph):
    return [(layer.name, layer.kind) for layer in graph.layers]


def test_channel_mismatch_is_rejected():
    with pytest.raises(GraphValidationError):
        NetworkGraph("g", 1, (Conv1d("a", 1, 4, 3), Conv1d("b", 2, 1, 3)))


def test_duplicate_names_are_rejected():
    with pytest.raises(GraphValidationError):
        NetworkGraph("g", 1, (Conv1d("a", 1, 1, 3), Elu("a")))


def test_residual_must_preserve_channels():
    with pytest.raises(GraphValidationError):
        NetworkGraph("g", 4, (Residual("r", (Conv1d("r.c", 4, 2, 3),)),))


def test_residual_must_preserve_rate():
    with pytest.raises(GraphValidationError):
        NetworkGraph("g", 4, (Residual("r", (Conv1d("r.c", 4, 4, 4, stride=2),)),))


def test_lstm_input_must_match():
    with pytest.raises(GraphValidationError):
        NetworkGraph("g", 3, (Lstm("l", 4, 4),))


def test_empty_graph_is_identity_shaped():
    graph = NetworkGraph("empty", 1, ())
    assert graph.out_channels == 1
    assert graph.downsampling == graph.upsampling == 1
    assert graph.output_length(100) == 100


def test_default_encoder_recipe():
    encoder = build_encoder(CodecConfig())
    assert encoder.downsampling == 64
    assert encoder.out_channels == 128
    assert encoder.stateful
    assert _top(encoder) == [
        ("encoder.conv_in", "conv1d"),
        ("encoder.block0.res0", "residual"),
        ("encoder.block0.act", "elu"),
        ("encoder.block0.down", "conv1d"),
        ("encoder.block1.res0", "residual"),
        ("encoder.block1.act", "elu"),
        ("encoder.block1.down", "conv1d"),
        ("encoder.block2.res0", "residual"),
        ("encoder.block2.act", "elu"),
        ("encoder.block2.down", "conv1d"),
        ("encoder.lstm", "lstm"),
        ("encoder.act_out", "elu"),
        ("encoder.conv_out", "conv1d"),
    ]
    downs = [layer for layer in encoder.walk() if layer.name.endswith(".down")]
    assert [(d.in_channels, d.out_channels, d.kernel_size, d.stride) for d in downs] == [
        (64, 128, 4, 2),
        (128, 256, 8, 4),
        (256, 512, 16, 8),
    ]
    unit = encoder.layers[1]
    assert [(l.kind, getattr(l, "kernel_size", None)) for l in unit.layers] == [
        ("elu", None),
        ("conv1d", 3),
        ("elu", None),
        ("conv1d", 1),
    ]


def test_default_decoder_recipe():
    decoder = build_decoder(CodecConfig())
    assert decoder.in_channels == 128
    assert decoder.out_channels == 1
    assert decoder.upsampling == 64
    assert isinstance(decoder.layers[-1], Tanh)
    ups = [layer for layer in decoder.walk() if isinstance(layer, TransposedConv1d)]
    assert [(u.in_channels, u.out_channels, u.kernel_size, u.stride) for u in ups] == [
        (128, 128, 16, 8),
        (128, 128, 8, 4),
        (128, 64, 4, 2),
    ]


def test_unit_stride_encoder_is_channel_mapping():
    encoder = build_encoder(CodecConfig(strides=(1,)))
    assert encoder.downsampling == 1
    assert encoder.output_length(1000) == 1000


@pytest.mark.parametrize("length", [1, 63, 64, 65, 1000, 44100])
def test_stride_arithmetic(length):
    cfg = CodecConfig()
    frames = build_encoder(cfg).output_length(length)
    assert frames == -(-length // 64)
    assert build_decoder(cfg).output_length(frames) == frames * 64


def test_imbalanced_encoder_keeps_decoder():
    wide = CodecConfig(encoder_dim=128)
    assert build_encoder(wide).out_channels == 128
    assert _top(build_decoder(wide)) == _top(build_decoder(CodecConfig()))
    first = build_encoder(wide).layers[0]
    assert first.out_channels == 128


def test_codec_graph_composes_encoder_and_decoder():
    cfg = CodecConfig()
    graph = build_codec_graph(cfg)
    assert graph.in_channels == graph.out_channels == 1
    assert graph.downsampling == graph.upsampling == 64


def test_dac_topology():
    encoder = build_dac_encoder()
    decoder = build_dac_decoder()
    assert encoder.downsampling == decoder.upsampling == 512
    dilations = sorted(
        {l.dilation for l in encoder.walk() if isinstance(l, Conv1d) and l.kernel_size == 7}
    )
    assert dilations == [1, 3, 9]
    assert not encoder.stateful and not decoder.stateful
    assert build_dac_decoder(dim=128).out_channels == 1


def test_weight_shapes_cover_every_parameter():
    graph = NetworkGraph("g", 2, (Conv1d("c", 2, 3, 5), Lstm("l", 3, 4, num_layers=2)))
    shapes = graph.weight_shapes()
    assert shapes["c.weight"] == (3, 2, 5)
    assert shapes["l.weight_ih_l0"] == (16, 3)
    assert shapes["l.weight_ih_l1"] == (16, 4)
    assert len(shapes) == 10
