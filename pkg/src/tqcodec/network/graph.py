#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Layer vocabulary and validated sequential graphs.
"""

from dataclasses import dataclass, field
import math
from typing import Dict, Iterator, List, Sequence, Tuple, Union

from ..exceptions import GraphValidationError

__all__ = [
    "Conv1d",
    "TransposedConv1d",
    "Lstm",
    "Elu",
    "Tanh",
    "Residual",
    "Layer",
    "NetworkGraph",
    "weight_shapes",
]


@dataclass(frozen=True)
class Conv1d:
    """
    Causal convolution; output j sees inputs j*stride - (kernel_size-1)*dilation .. j*stride
    """

    name: str
    in_channels: int
    out_channels: int
    kernel_size: int
    stride: int = 1
    dilation: int = 1
    kind: str = field(default="conv1d", init=False)


@dataclass(frozen=True)
class TransposedConv1d:
    """
    Causal transposed convolution, output trimmed to input_length * stride
    """

    name: str
    in_channels: int
    out_channels: int
    kernel_size: int
    stride: int = 1
    kind: str = field(default="tconv1d", init=False)


@dataclass(frozen=True)
class Lstm:
    name: str
    input_size: int
    hidden_size: int
    num_layers: int = 1
    kind: str = field(default="lstm", init=False)


@dataclass(frozen=True)
class Elu:
    name: str
    alpha: float = 1.0
    kind: str = field(default="elu", init=False)


@dataclass(frozen=True)
class Tanh:
    name: str
    kind: str = field(default="tanh", init=False)


@dataclass(frozen=True)
class Residual:
    """
    y = x + layers(x); the inner path must preserve channels and rate
    """

    name: str
    layers: Tuple["Layer", ...]
    kind: str = field(default="residual", init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))


Layer = Union[Conv1d, TransposedConv1d, Lstm, Elu, Tanh, Residual]


def weight_shapes(layer: Layer) -> Dict[str, Tuple[int, ...]]:
    """
    Tensor names and shapes a parameterized layer resolves from a WeightStore
    """
    if isinstance(layer, Conv1d):
        return {
            f"{layer.name}.weight": (layer.out_channels, layer.in_channels, layer.kernel_size),
            f"{layer.name}.bias": (layer.out_channels,),
        }
    if isinstance(layer, TransposedConv1d):
        return {
            f"{layer.name}.weight": (layer.in_channels, layer.out_channels, layer.kernel_size),
            f"{layer.name}.bias": (layer.out_channels,),
        }
    if isinstance(layer, Lstm):
        shapes: Dict[str, Tuple[int, ...]] = {}
        gates = 4 * layer.hidden_size
        for index in range(layer.num_layers):
            inputs = layer.input_size if index == 0 else layer.hidden_size
            shapes[f"{layer.name}.weight_ih_l{index}"] = (gates, inputs)
            shapes[f"{layer.name}.weight_hh_l{index}"] = (gates, layer.hidden_size)
            shapes[f"{layer.name}.bias_ih_l{index}"] = (gates,)
            shapes[f"{layer.name}.bias_hh_l{index}"] = (gates,)
        return shapes
    return {}


def _walk(layers: Sequence[Layer]) -> Iterator[Layer]:
    for layer in layers:
        yield layer
        if isinstance(layer, Residual):
            yield from _walk(layer.layers)


def _propagate(layers: Sequence[Layer], channels: int, inside_residual: bool) -> int:
    for layer in layers:
        if isinstance(layer, (Conv1d, TransposedConv1d)):
            if layer.in_channels != channels:
                raise GraphValidationError(
                    f"{layer.name} expects {layer.in_channels} channels, receives {channels}"
                )
            if min(layer.kernel_size, layer.stride, layer.out_channels) < 1:
                raise GraphValidationError(f"{layer.name} has a non-positive dimension")
            if inside_residual and (layer.stride != 1 or isinstance(layer, TransposedConv1d)):
                raise GraphValidationError(f"{layer.name} changes rate inside a residual path")
            channels = layer.out_channels
        elif isinstance(layer, Lstm):
            if layer.input_size != channels:
                raise GraphValidationError(
                    f"{layer.name} expects {layer.input_size} features, receives {channels}"
                )
            if layer.num_layers < 1 or layer.hidden_size < 1:
                raise GraphValidationError(f"{layer.name} has a non-positive dimension")
            channels = layer.hidden_size
        elif isinstance(layer, Residual):
            inner = _propagate(layer.layers, channels, True)
            if inner != channels:
                raise GraphValidationError(
                    f"{layer.name} maps {channels} channels to {inner}, cannot add skip"
                )
        elif not isinstance(layer, (Elu, Tanh)):
            raise GraphValidationError(f"unknown layer type {type(layer).__name__}")
    return channels


@dataclass(frozen=True)
class NetworkGraph:
    """
    Ordered layers from `in_channels` inputs, validated on construction
    """

    name: str
    in_channels: int
    layers: Tuple[Layer, ...]
    out_channels: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        names = [layer.name for layer in _walk(self.layers)]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise GraphValidationError(f"{self.name}: duplicate layer names {duplicates}")
        if self.in_channels < 1:
            raise GraphValidationError(f"{self.name}: in_channels must be positive")
        object.__setattr__(self, "out_channels", _propagate(self.layers, self.in_channels, False))

    @property
    def downsampling(self) -> int:
        return math.prod(l.stride for l in _walk(self.layers) if isinstance(l, Conv1d))

    @property
    def upsampling(self) -> int:
        return math.prod(l.stride for l in _walk(self.layers) if isinstance(l, TransposedConv1d))

    @property
    def stateful(self) -> bool:
        return any(isinstance(l, Lstm) for l in _walk(self.layers))

    def walk(self) -> Iterator[Layer]:
        """
        Depth-first over every layer, residual containers before their contents
        """
        return _walk(self.layers)

    def parameter_layers(self) -> List[Layer]:
        return [l for l in self.walk() if isinstance(l, (Conv1d, TransposedConv1d, Lstm))]

    def weight_shapes(self) -> Dict[str, Tuple[int, ...]]:
        shapes: Dict[str, Tuple[int, ...]] = {}
        for layer in self.parameter_layers():
            shapes.update(weight_shapes(layer))
        return shapes

    def output_length(self, input_length: int) -> int:
        length = input_length
        for layer in self.walk():
            if isinstance(layer, Conv1d):
                length = -(-length // layer.stride)
            elif isinstance(layer, TransposedConv1d):
                length *= layer.stride
        return length

    def then(self, other: "NetworkGraph", name: str = "") -> "NetworkGraph":
        """
        Sequential composition; channel agreement is checked by validation
        """
        return NetworkGraph(
            name or f"{self.name}+{other.name}", self.in_channels, self.layers + other.layers
        )
