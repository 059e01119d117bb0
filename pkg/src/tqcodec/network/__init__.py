#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

from .builders import (
    build_codec_graph,
    build_dac_decoder,
    build_dac_encoder,
    build_decoder,
    build_encoder,
)
from .forward import StreamingSession, chunked, forward, streaming_decode, streaming_forward
from .graph import Conv1d, Elu, Lstm, NetworkGraph, Residual, Tanh, TransposedConv1d
from .weights import WeightStore, init_weights, load_weights, save_weights, zero_weights

__all__ = [
    "Conv1d",
    "TransposedConv1d",
    "Lstm",
    "Elu",
    "Tanh",
    "Residual",
    "NetworkGraph",
    "WeightStore",
    "StreamingSession",
    "build_encoder",
    "build_decoder",
    "build_codec_graph",
    "build_dac_encoder",
    "build_dac_decoder",
    "forward",
    "streaming_forward",
    "streaming_decode",
    "chunked",
    "init_weights",
    "zero_weights",
    "load_weights",
    "save_weights",
]
