#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Causal inference for NetworkGraphs. Offline forward is a single-chunk streaming pass.
"""

from typing import Iterable, Iterator, List, Optional, Tuple

from aws_lambda_powertools import Logger
import numpy as np

from ..constants import SERVICE_NAME
from ..exceptions import ContractError, StreamProtocolError
from ..sequences import LatentSequence
from .graph import Conv1d, Elu, Layer, Lstm, NetworkGraph, Residual, Tanh, TransposedConv1d
from .weights import WeightStore

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = ["StreamingSession", "forward", "streaming_forward", "streaming_decode", "chunked"]


class _ConvState:
    """
    Keeps inputs from global index next_output*stride - (K-1)*dilation onward
    """

    def __init__(self, layer: Conv1d, weights: WeightStore) -> None:
        self.layer = layer
        shape = (layer.out_channels, layer.in_channels, layer.kernel_size)
        self.weight = weights.resolve(f"{layer.name}.weight", shape)
        self.bias = weights.resolve(f"{layer.name}.bias", (layer.out_channels,))
        self.reset()

    def reset(self) -> None:
        layer = self.layer
        self.pending = np.zeros((layer.in_channels, (layer.kernel_size - 1) * layer.dilation))
        # inputs still to discard when the next output's window starts past the buffered tail
        self.skip = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        layer = self.layer
        dropped = min(self.skip, x.shape[1])
        self.skip -= dropped
        pending = np.concatenate([self.pending, x[:, dropped:]], axis=1)
        reach = (layer.kernel_size - 1) * layer.dilation
        ready = pending.shape[1] - reach
        count = -(-ready // layer.stride) if ready > 0 else 0

        y = np.repeat(self.bias[:, np.newaxis], count, axis=1)
        if count:
            span = (count - 1) * layer.stride + 1
            for tap in range(layer.kernel_size):
                start = tap * layer.dilation
                y += self.weight[:, :, tap] @ pending[:, start : start + span : layer.stride]
        self.skip += max(0, count * layer.stride - pending.shape[1])
        self.pending = pending[:, count * layer.stride :]
        return y


class _TransposedConvState:
    """
    y[m*s + p] = sum_q W[:, :, p + q*s]^T x[m - q]; keeps the last ceil(K/s) - 1 inputs
    """

    def __init__(self, layer: TransposedConv1d, weights: WeightStore) -> None:
        self.layer = layer
        shape = (layer.in_channels, layer.out_channels, layer.kernel_size)
        self.weight = weights.resolve(f"{layer.name}.weight", shape)
        self.bias = weights.resolve(f"{layer.name}.bias", (layer.out_channels,))
        self.depth = -(-layer.kernel_size // layer.stride)
        self.reset()

    def reset(self) -> None:
        self.history = np.zeros((self.layer.in_channels, self.depth - 1))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        layer = self.layer
        frames = x.shape[1]
        pending = np.concatenate([self.history, x], axis=1)
        y = np.zeros((layer.out_channels, frames, layer.stride))
        if frames:
            for q in range(self.depth):
                lagged = pending[:, self.depth - 1 - q : self.depth - 1 - q + frames]
                for phase in range(layer.stride):
                    tap = phase + q * layer.stride
                    if tap < layer.kernel_size:
                        y[:, :, phase] += self.weight[:, :, tap].T @ lagged
        self.history = pending[:, pending.shape[1] - (self.depth - 1) :]
        return y.reshape(layer.out_channels, frames * layer.stride) + self.bias[:, np.newaxis]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class _LstmState:
    """
    Stacked LSTM, gate order input, forget, cell, output
    """

    def __init__(self, layer: Lstm, weights: WeightStore) -> None:
        self.layer = layer
        hidden = layer.hidden_size
        self.params = []
        for index in range(layer.num_layers):
            inputs = layer.input_size if index == 0 else hidden
            self.params.append(
                (
                    weights.resolve(f"{layer.name}.weight_ih_l{index}", (4 * hidden, inputs)),
                    weights.resolve(f"{layer.name}.weight_hh_l{index}", (4 * hidden, hidden)),
                    weights.resolve(f"{layer.name}.bias_ih_l{index}", (4 * hidden,))
                    + weights.resolve(f"{layer.name}.bias_hh_l{index}", (4 * hidden,)),
                )
            )
        self.reset()

    def reset(self) -> None:
        hidden = self.layer.hidden_size
        self.h = [np.zeros(hidden) for _ in range(self.layer.num_layers)]
        self.c = [np.zeros(hidden) for _ in range(self.layer.num_layers)]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        hidden = self.layer.hidden_size
        sequence = x
        for index, (w_ih, w_hh, bias) in enumerate(self.params):
            projected = w_ih @ sequence + bias[:, np.newaxis]
            out = np.empty((hidden, sequence.shape[1]))
            h, c = self.h[index], self.c[index]
            for t in range(sequence.shape[1]):
                gates = projected[:, t] + w_hh @ h
                i = _sigmoid(gates[:hidden])
                f = _sigmoid(gates[hidden : 2 * hidden])
                g = np.tanh(gates[2 * hidden : 3 * hidden])
                o = _sigmoid(gates[3 * hidden :])
                c = f * c + i * g
                h = o * np.tanh(c)
                out[:, t] = h
            self.h[index], self.c[index] = h, c
            sequence = out
        return sequence


class _ActivationState:
    def __init__(self, layer: Layer) -> None:
        self.layer = layer

    def reset(self) -> None:
        pass

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if isinstance(self.layer, Tanh):
            return np.tanh(x)
        alpha = self.layer.alpha
        return np.where(x > 0, x, alpha * np.expm1(np.minimum(x, 0.0)))


class _SequenceState:
    def __init__(self, layers: Iterable[Layer], weights: WeightStore) -> None:
        self.states = [_build_state(layer, weights) for layer in layers]

    def reset(self) -> None:
        for state in self.states:
            state.reset()

    def __call__(self, x: np.ndarray) -> np.ndarray:
        for state in self.states:
            x = state(x)
        return x


class _ResidualState(_SequenceState):
    def __init__(self, layer: Residual, weights: WeightStore) -> None:
        super().__init__(layer.layers, weights)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return x + super().__call__(x)


def _build_state(layer: Layer, weights: WeightStore):
    if isinstance(layer, Conv1d):
        return _ConvState(layer, weights)
    if isinstance(layer, TransposedConv1d):
        return _TransposedConvState(layer, weights)
    if isinstance(layer, Lstm):
        return _LstmState(layer, weights)
    if isinstance(layer, Residual):
        return _ResidualState(layer, weights)
    if isinstance(layer, (Elu, Tanh)):
        return _ActivationState(layer)
    raise ContractError(f"no executor for layer type {type(layer).__name__}")


class StreamingSession:
    """
    Chunk-by-chunk execution of one graph; owns all per-layer history and recurrent state

    A session is single-threaded. Run one session per audio channel for concurrency.
    """

    def __init__(self, graph: NetworkGraph, weights: WeightStore) -> None:
        self.graph = graph
        self._body = _SequenceState(graph.layers, weights)
        self.position = 0

    def reset(self) -> None:
        self._body.reset()
        self.position = 0

    def process(self, chunk: np.ndarray, offset: Optional[int] = None) -> np.ndarray:
        """
        Feed input frames [in_channels, n]; `offset`, when given, must equal frames consumed so far
        """
        chunk = np.asarray(chunk, dtype=np.float64)
        if chunk.ndim == 1:
            chunk = chunk[np.newaxis, :]
        if chunk.shape[0] != self.graph.in_channels:
            raise ContractError(
                f"{self.graph.name} expects {self.graph.in_channels} channels, got {chunk.shape[0]}"
            )
        if offset is not None and offset != self.position:
            raise StreamProtocolError(
                f"{self.graph.name}: chunk starts at frame {offset}, expected {self.position}"
            )
        if not np.all(np.isfinite(chunk)):
            raise ContractError("input contains NaN or infinite values")
        if chunk.shape[1] == 0:
            return np.zeros((self.graph.out_channels, 0))

        out = self._body(chunk)
        self.position += chunk.shape[1]
        return out


def forward(graph: NetworkGraph, weights: WeightStore, x: np.ndarray) -> np.ndarray:
    """
    Offline inference: [in_channels, T] -> [out_channels, graph.output_length(T)]
    """
    return StreamingSession(graph, weights).process(x)


def streaming_forward(
    graph: NetworkGraph,
    weights: WeightStore,
    chunks: Iterable[Tuple[int, np.ndarray]],
    session: Optional[StreamingSession] = None,
) -> Iterator[np.ndarray]:
    """
    Yield one output block per (start_frame, frames) chunk; chunks must arrive in order
    """
    session = session or StreamingSession(graph, weights)
    for offset, frames in chunks:
        yield session.process(frames, offset=offset)


def chunked(x: np.ndarray, size: int) -> List[Tuple[int, np.ndarray]]:
    """
    Split [channels, T] into (start_frame, frames) pieces of at most `size` frames
    """
    if size < 1:
        raise ContractError(f"chunk size must be positive, got {size}")
    return [(start, x[:, start : start + size]) for start in range(0, x.shape[1], size)]


def streaming_decode(
    graph: NetworkGraph, weights: WeightStore, latent: LatentSequence, chunk_frames: int
) -> Iterator[np.ndarray]:
    """
    Feed latent frames to a decoder `chunk_frames` at a time, yielding [out_channels, n] blocks
    """
    session = StreamingSession(graph, weights)
    blocks = chunked(latent.channels_first(), chunk_frames)
    logger.debug("Streaming decode", graph=graph.name, chunks=len(blocks), chunk=chunk_frames)
    yield from streaming_forward(graph, weights, blocks, session)
