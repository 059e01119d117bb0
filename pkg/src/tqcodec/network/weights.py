#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Named f32 tensors and the "TQCW" container:
*   magic "TQCW", version u8, tensor_count u32, then per tensor
*   name_len u16, UTF-8 name, rank u8, dims u32 x rank, f32 data row-major (little-endian)
"""

import math
import os
from pathlib import Path
import struct
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from aws_lambda_powertools import Logger
import numpy as np

from ..constants import SERVICE_NAME, WEIGHTS_MAGIC, WEIGHTS_VERSION
from ..exceptions import WeightParseError, WeightResolutionError, WeightValidationError
from .graph import Conv1d, Lstm, NetworkGraph, TransposedConv1d, weight_shapes

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = [
    "WeightStore",
    "save_weights",
    "load_weights",
    "to_bytes",
    "from_bytes",
    "init_weights",
    "zero_weights",
]

PathLike = Union[str, os.PathLike]

_HEADER = struct.Struct("<4sBI")


class WeightStore:
    """
    Ordered name -> float32 tensor mapping
    """

    def __init__(self, tensors: Optional[Mapping[str, np.ndarray]] = None) -> None:
        self._tensors: Dict[str, np.ndarray] = {}
        for name, tensor in (tensors or {}).items():
            self[name] = tensor

    def __setitem__(self, name: str, tensor: np.ndarray) -> None:
        array = np.ascontiguousarray(tensor, dtype=np.float32)
        array.setflags(write=False)
        self._tensors[name] = array

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._tensors[name]
        except KeyError:
            raise WeightResolutionError(f"no tensor named '{name}'")

    def __contains__(self, name: object) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def names(self) -> List[str]:
        return list(self._tensors)

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self._tensors.items())

    def update(self, other: "WeightStore") -> None:
        for name, tensor in other.items():
            self[name] = tensor

    def subset(self, prefix: str) -> "WeightStore":
        return WeightStore({k: v for k, v in self._tensors.items() if k.startswith(prefix)})

    def resolve(self, name: str, shape: Tuple[int, ...]) -> np.ndarray:
        """
        Fetch one tensor as float64, checking shape and finiteness
        """
        tensor = self[name]
        if tensor.shape != tuple(shape):
            raise WeightValidationError(f"'{name}' has shape {tensor.shape}, expected {shape}")
        if not np.all(np.isfinite(tensor)):
            raise WeightValidationError(f"'{name}' contains NaN or infinite values")
        return tensor.astype(np.float64)

    def check(self, graph: NetworkGraph) -> None:
        """
        Every parameter of `graph` resolves, and nothing under the graph's prefix is left over
        """
        expected = graph.weight_shapes()
        for name, shape in expected.items():
            self.resolve(name, shape)
        prefix = f"{graph.name}."
        orphans = [n for n in self._tensors if n.startswith(prefix) and n not in expected]
        if orphans:
            raise WeightValidationError(f"tensors without a layer in {graph.name}: {orphans}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightStore) or self.names() != other.names():
            return False
        return all(np.array_equal(self[n], other[n]) for n in self.names())


def to_bytes(store: WeightStore) -> bytes:
    chunks = [_HEADER.pack(WEIGHTS_MAGIC, WEIGHTS_VERSION, len(store))]
    for name, tensor in store.items():
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF or tensor.ndim > 0xFF:
            raise WeightValidationError(f"'{name}' cannot be represented in the container")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack(f"<B{tensor.ndim}I", tensor.ndim, *tensor.shape))
        chunks.append(tensor.astype("<f4").tobytes())
    return b"".join(chunks)


def from_bytes(data: bytes) -> WeightStore:
    def take(offset: int, size: int, what: str) -> bytes:
        if offset + size > len(data):
            raise WeightParseError(
                f"truncated {what} at byte offset {offset}: need {size}, have {len(data) - offset}"
            )
        return data[offset : offset + size]

    magic, version, count = _HEADER.unpack(take(0, _HEADER.size, "header"))
    if magic != WEIGHTS_MAGIC:
        raise WeightParseError(f"bad magic {magic!r}, expected {WEIGHTS_MAGIC!r}")
    if version != WEIGHTS_VERSION:
        raise WeightParseError(f"unsupported container version {version}")

    store = WeightStore()
    offset = _HEADER.size
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(offset, 2, "name length"))
        offset += 2
        try:
            name = take(offset, name_len, "name").decode("utf-8")
        except UnicodeDecodeError:
            raise WeightParseError(f"tensor name at byte offset {offset} is not UTF-8")
        offset += name_len
        (rank,) = struct.unpack("<B", take(offset, 1, "rank"))
        offset += 1
        dims = struct.unpack(f"<{rank}I", take(offset, 4 * rank, "dims"))
        offset += 4 * rank

        size = 4 * math.prod(dims)
        if size > len(data) - offset:
            raise WeightParseError(
                f"'{name}' declares {dims}, {size} bytes exceed the {len(data) - offset} remaining"
            )
        store[name] = np.frombuffer(take(offset, size, "data"), dtype="<f4").reshape(dims)
        offset += size

    if offset != len(data):
        raise WeightParseError(f"{len(data) - offset} trailing bytes after {count} tensors")
    return store


def save_weights(store: WeightStore, path: PathLike) -> None:
    Path(path).write_bytes(to_bytes(store))
    logger.debug(f"Saved {len(store)} tensors", path=str(path))


def load_weights(path: PathLike) -> WeightStore:
    store = from_bytes(Path(path).read_bytes())
    logger.debug(f"Loaded {len(store)} tensors", path=str(path))
    return store


def init_weights(
    graph: NetworkGraph, seed: int = 0, scale: float = 1.0, bias: bool = True
) -> WeightStore:
    """
    Deterministic random initialisation, fan-in scaled so activations stay O(1)
    """
    rng = np.random.default_rng(seed)
    store = WeightStore()
    for layer in graph.parameter_layers():
        if isinstance(layer, (Conv1d, TransposedConv1d)):
            fan_in = layer.in_channels * layer.kernel_size
            if isinstance(layer, TransposedConv1d):
                # each output sample sees about kernel/stride taps per input channel
                fan_in = layer.in_channels * max(1, layer.kernel_size // layer.stride)
            std = scale / math.sqrt(fan_in)
            for name, shape in weight_shapes(layer).items():
                if name.endswith(".weight"):
                    store[name] = rng.normal(0.0, std, shape)
                else:
                    store[name] = rng.normal(0.0, 0.01 * scale, shape) if bias else np.zeros(shape)
        elif isinstance(layer, Lstm):
            bound = scale / math.sqrt(layer.hidden_size)
            for name, shape in weight_shapes(layer).items():
                if ".bias" in name and not bias:
                    store[name] = np.zeros(shape)
                else:
                    store[name] = rng.uniform(-bound, bound, shape)
    return store


def zero_weights(graph: NetworkGraph) -> WeightStore:
    return WeightStore({name: np.zeros(shape) for name, shape in graph.weight_shapes().items()})

