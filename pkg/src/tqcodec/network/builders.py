#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Encoder and decoder topologies.
"""

from typing import List, Optional, Sequence

from ..config import CodecConfig
from .graph import Conv1d, Elu, Layer, Lstm, NetworkGraph, Residual, Tanh, TransposedConv1d

__all__ = [
    "build_encoder",
    "build_decoder",
    "build_codec_graph",
    "build_dac_encoder",
    "build_dac_decoder",
    "DAC_STRIDES",
    "DAC_DILATIONS",
]

DAC_STRIDES = (2, 4, 8, 8)

DAC_DILATIONS = (1, 3, 9)


def _residual_unit(
    prefix: str, width: int, kernel_size: int = 3, dilation: int = 1, compress: int = 1
) -> Residual:
    hidden = max(1, width // compress)
    return Residual(
        prefix,
        (
            Elu(f"{prefix}.act0"),
            Conv1d(f"{prefix}.conv0", width, hidden, kernel_size, dilation=dilation),
            Elu(f"{prefix}.act1"),
            Conv1d(f"{prefix}.conv1", hidden, width, 1),
        ),
    )


def build_encoder(
    cfg: CodecConfig,
    in_channels: int = 1,
    strides: Optional[Sequence[int]] = None,
    dim: Optional[int] = None,
    latent: Optional[int] = None,
    lite: bool = False,
    name: str = "encoder",
) -> NetworkGraph:
    """
    conv k7 -> [residual unit, ELU, conv k2s stride s] per stride -> LSTM -> conv k7

    `lite` drops residual units and the LSTM and keeps the width constant.
    """
    strides = cfg.strides if strides is None else tuple(strides)
    width = cfg.encoder_dim if dim is None else dim
    latent = cfg.latent_dim if latent is None else latent

    layers: List[Layer] = [Conv1d(f"{name}.conv_in", in_channels, width, 7)]
    for index, stride in enumerate(strides):
        prefix = f"{name}.block{index}"
        out_width = width if lite else 2 * width
        if not lite:
            layers.append(
                _residual_unit(f"{prefix}.res0", width, compress=cfg.residual_compress)
            )
        layers.append(Elu(f"{prefix}.act"))
        layers.append(Conv1d(f"{prefix}.down", width, out_width, 2 * stride, stride=stride))
        width = out_width

    if not lite:
        layers.append(Lstm(f"{name}.lstm", width, width))
    layers.append(Elu(f"{name}.act_out"))
    layers.append(Conv1d(f"{name}.conv_out", width, latent, 7))
    return NetworkGraph(name, in_channels, layers)


def build_decoder(
    cfg: CodecConfig,
    out_channels: int = 1,
    strides: Optional[Sequence[int]] = None,
    dim: Optional[int] = None,
    latent: Optional[int] = None,
    lite: bool = False,
    name: str = "decoder",
) -> NetworkGraph:
    """
    conv k7 -> LSTM -> [ELU, transposed conv k2s stride s, residual unit] per stride -> conv k7
    -> tanh

    Strides run in reverse encoder order. Width stays at `dim` and halves in the last block.
    """
    strides = tuple(reversed(cfg.strides if strides is None else tuple(strides)))
    width = cfg.decoder_dim if dim is None else dim
    latent = cfg.latent_dim if latent is None else latent

    layers: List[Layer] = [Conv1d(f"{name}.conv_in", latent, width, 7)]
    if not lite:
        layers.append(Lstm(f"{name}.lstm", width, width))
    for index, stride in enumerate(strides):
        prefix = f"{name}.block{index}"
        out_width = max(1, width // 2) if index == len(strides) - 1 else width
        layers.append(Elu(f"{prefix}.act"))
        layers.append(
            TransposedConv1d(f"{prefix}.up", width, out_width, 2 * stride, stride=stride)
        )
        if not lite:
            layers.append(
                _residual_unit(f"{prefix}.res0", out_width, compress=cfg.residual_compress)
            )
        width = out_width

    layers.append(Elu(f"{name}.act_out"))
    layers.append(Conv1d(f"{name}.conv_out", width, out_channels, 7))
    layers.append(Tanh(f"{name}.tanh"))
    return NetworkGraph(name, latent, layers)


def build_codec_graph(cfg: CodecConfig) -> NetworkGraph:
    """
    Encoder followed directly by decoder; quantization is rate-preserving and omitted
    """
    return build_encoder(cfg).then(build_decoder(cfg), name="codec")


def build_dac_encoder(
    strides: Sequence[int] = DAC_STRIDES,
    dim: int = 64,
    latent: int = 1024,
    name: str = "dac_encoder",
) -> NetworkGraph:
    """
    Baseline topology: three dilated k7 residual units (1, 3, 9) before each downsampling conv
    """
    width = dim
    layers: List[Layer] = [Conv1d(f"{name}.conv_in", 1, width, 7)]
    for index, stride in enumerate(strides):
        prefix = f"{name}.block{index}"
        for unit, dilation in enumerate(DAC_DILATIONS):
            layers.append(_residual_unit(f"{prefix}.res{unit}", width, 7, dilation))
        layers.append(Elu(f"{prefix}.act"))
        layers.append(Conv1d(f"{prefix}.down", width, 2 * width, 2 * stride, stride=stride))
        width *= 2
    layers.append(Elu(f"{name}.act_out"))
    layers.append(Conv1d(f"{name}.conv_out", width, latent, 3))
    return NetworkGraph(name, 1, layers)


def build_dac_decoder(
    strides: Sequence[int] = DAC_STRIDES,
    dim: int = 1536,
    latent: int = 1024,
    name: str = "dac_decoder",
) -> NetworkGraph:
    """
    Baseline topology: width halves per block; `dim` 128 gives the reduced-width variant
    """
    width = dim
    layers: List[Layer] = [Conv1d(f"{name}.conv_in", latent, width, 7)]
    for index, stride in enumerate(reversed(tuple(strides))):
        prefix = f"{name}.block{index}"
        out_width = max(1, width // 2)
        layers.append(Elu(f"{prefix}.act"))
        layers.append(
            TransposedConv1d(f"{prefix}.up", width, out_width, 2 * stride, stride=stride)
        )
        for unit, dilation in enumerate(DAC_DILATIONS):
            layers.append(_residual_unit(f"{prefix}.res{unit}", out_width, 7, dilation))
        width = out_width
    layers.append(Elu(f"{name}.act_out"))
    layers.append(Conv1d(f"{name}.conv_out", width, 1, 7))
    layers.append(Tanh(f"{name}.tanh"))
    return NetworkGraph(name, latent, layers)
