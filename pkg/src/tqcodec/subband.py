#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Subband composition: PQMF bands are routed to band paths whose latents are concatenated
* for joint quantization and split again after dequantization.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import math
from typing import List, Optional, Sequence, Tuple, Union

from aws_lambda_powertools import Logger
import numpy as np

from .audio import AudioBuffer
from .config import CodecConfig
from .constants import SERVICE_NAME
from .exceptions import ContractError, QuantizerStateError
from .network.builders import build_decoder, build_encoder
from .network.forward import forward, streaming_decode
from .network.graph import NetworkGraph
from .network.weights import WeightStore, init_weights
from .pqmf import PqmfBank, SubbandSignal, analyze, default_bank, synthesize
from .quantizer.residual import ResidualQuantizer, dequantize, quantize
from .sequences import CodeSequence, LatentSequence

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = [
    "SubbandLayout",
    "FramePath",
    "NetworkPath",
    "SubbandModel",
    "build_subband_graphs",
    "build_subband_model",
    "pqmf_direct_model",
    "subband_encode",
    "subband_decode",
    "pqmf_direct_encode",
    "pqmf_direct_decode",
]


@dataclass(frozen=True)
class SubbandLayout:
    num_bands: int
    core_bands: int
    core_latent_dim: int
    side_latent_dim: int
    strides: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "strides", tuple(self.strides))
        if not 0 < self.core_bands <= self.num_bands:
            raise ContractError(f"core bands {self.core_bands} outside [1, {self.num_bands}]")

    @classmethod
    def from_config(cls, cfg: CodecConfig) -> "SubbandLayout":
        return cls(
            cfg.num_bands, cfg.core_bands, cfg.latent_dim, cfg.side_band_latent, cfg.subband_strides
        )

    @property
    def side_bands(self) -> int:
        return self.num_bands - self.core_bands

    @property
    def frame_stack(self) -> int:
        return math.prod(self.strides)

    @property
    def total_stride(self) -> int:
        return self.num_bands * self.frame_stack

    @property
    def total_latent(self) -> int:
        return self.core_latent_dim + self.side_bands * self.side_latent_dim

    def frame_rate(self, sample_rate: int) -> Fraction:
        return Fraction(sample_rate, self.total_stride)


@dataclass(frozen=True, eq=False)
class FramePath:
    """
    Gathers `stack` consecutive samples of each band into one frame, band-major

    Per-band `gains` are applied before framing and removed after.
    """

    bands: Tuple[int, ...]
    stack: int
    gains: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "bands", tuple(self.bands))
        gains = np.ones(len(self.bands)) if self.gains is None else np.asarray(self.gains, float)
        if gains.shape != (len(self.bands),) or np.any(gains <= 0):
            raise ContractError("gains must be one positive value per band")
        object.__setattr__(self, "gains", gains)

    @property
    def latent_dim(self) -> int:
        return len(self.bands) * self.stack

    @property
    def stride(self) -> int:
        return self.stack

    def num_frames(self, band_length: int) -> int:
        return -(-band_length // self.stack)

    def encode(self, signal: np.ndarray) -> np.ndarray:
        count = self.num_frames(signal.shape[1])
        padded = np.zeros((len(self.bands), count * self.stack))
        padded[:, : signal.shape[1]] = signal * self.gains[:, np.newaxis]
        frames = padded.reshape(len(self.bands), count, self.stack).transpose(1, 0, 2)
        return frames.reshape(count, self.latent_dim)

    def decode(self, frames: np.ndarray, chunk_frames: Optional[int] = None) -> np.ndarray:
        count = frames.shape[0]
        signal = frames.reshape(count, len(self.bands), self.stack).transpose(1, 0, 2)
        return signal.reshape(len(self.bands), count * self.stack) / self.gains[:, np.newaxis]


@dataclass(frozen=True, eq=False)
class NetworkPath:
    bands: Tuple[int, ...]
    encoder: NetworkGraph
    decoder: NetworkGraph
    weights: WeightStore = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bands", tuple(self.bands))
        if self.encoder.in_channels != len(self.bands):
            raise ContractError(
                f"{self.encoder.name} takes {self.encoder.in_channels} bands, "
                f"path routes {len(self.bands)}"
            )
        if self.decoder.out_channels != len(self.bands):
            raise ContractError(f"{self.decoder.name} emits {self.decoder.out_channels} bands")
        if self.decoder.in_channels != self.encoder.out_channels:
            raise ContractError(f"{self.decoder.name} does not consume {self.encoder.name} latents")
        self.weights.check(self.encoder)
        self.weights.check(self.decoder)

    @property
    def latent_dim(self) -> int:
        return self.encoder.out_channels

    @property
    def stride(self) -> int:
        return self.encoder.downsampling

    def num_frames(self, band_length: int) -> int:
        return self.encoder.output_length(band_length)

    def encode(self, signal: np.ndarray) -> np.ndarray:
        return forward(self.encoder, self.weights, signal).T

    def decode(self, frames: np.ndarray, chunk_frames: Optional[int] = None) -> np.ndarray:
        if chunk_frames is None or frames.shape[0] == 0:
            return forward(self.decoder, self.weights, frames.T)
        latent = LatentSequence(frames, 1)
        blocks = streaming_decode(self.decoder, self.weights, latent, chunk_frames)
        return np.concatenate(list(blocks), axis=1)


BandPath = Union[FramePath, NetworkPath]


@dataclass(frozen=True, eq=False)
class SubbandModel:
    """
    Filterbank plus band paths; paths must cover bands 0..M-1 in ascending order
    """

    bank: PqmfBank
    paths: Tuple[BandPath, ...]
    sample_rate: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "paths", tuple(self.paths))
        routed = [band for path in self.paths for band in path.bands]
        if routed != list(range(self.bank.num_bands)):
            raise ContractError(
                f"paths route bands {routed}, expected 0..{self.bank.num_bands - 1} in order"
            )
        if len({path.stride for path in self.paths}) != 1:
            raise ContractError("band paths must share one frame stride")

    @property
    def latent_sizes(self) -> List[int]:
        return [path.latent_dim for path in self.paths]

    @property
    def latent_dim(self) -> int:
        return sum(self.latent_sizes)

    @property
    def total_stride(self) -> int:
        return self.bank.num_bands * self.paths[0].stride

    @property
    def frame_rate(self) -> Fraction:
        return Fraction(self.sample_rate, self.total_stride)

    @property
    def delay(self) -> int:
        return self.bank.group_delay


def build_subband_graphs(cfg: CodecConfig) -> List[Tuple[NetworkGraph, NetworkGraph]]:
    """
    Full-width core network over the stacked core bands, then one quarter-width lite
    network per side band
    """
    layout = SubbandLayout.from_config(cfg)
    graphs = [
        (
            build_encoder(
                cfg, in_channels=layout.core_bands, strides=layout.strides, name="core.encoder"
            ),
            build_decoder(
                cfg, out_channels=layout.core_bands, strides=layout.strides, name="core.decoder"
            ),
        )
    ]
    for band in range(layout.core_bands, layout.num_bands):
        graphs.append(
            (
                build_encoder(
                    cfg,
                    strides=layout.strides,
                    dim=max(1, cfg.encoder_dim // 4),
                    latent=layout.side_latent_dim,
                    lite=True,
                    name=f"side{band}.encoder",
                ),
                build_decoder(
                    cfg,
                    strides=layout.strides,
                    dim=max(1, cfg.decoder_dim // 4),
                    latent=layout.side_latent_dim,
                    lite=True,
                    name=f"side{band}.decoder",
                ),
            )
        )
    return graphs


def build_subband_model(
    cfg: CodecConfig,
    weights: Optional[WeightStore] = None,
    bank: Optional[PqmfBank] = None,
) -> SubbandModel:
    """
    Network paths for subband_seanet mode; missing weights are seeded from cfg.seed
    """
    layout = SubbandLayout.from_config(cfg)
    bank = bank or default_bank(cfg.num_bands, cfg.pqmf_taps)
    graphs = build_subband_graphs(cfg)

    if weights is None:
        weights = WeightStore()
        for index, (encoder, decoder) in enumerate(graphs):
            weights.update(init_weights(encoder, seed=cfg.seed + 2 * index))
            weights.update(init_weights(decoder, seed=cfg.seed + 2 * index + 1))

    band_groups = [tuple(range(layout.core_bands))]
    band_groups += [(band,) for band in range(layout.core_bands, layout.num_bands)]
    paths = [
        NetworkPath(bands, encoder, decoder, weights)
        for bands, (encoder, decoder) in zip(band_groups, graphs)
    ]
    return SubbandModel(bank, tuple(paths), cfg.sample_rate)


def pqmf_direct_model(cfg: CodecConfig, bank: Optional[PqmfBank] = None) -> SubbandModel:
    """
    One frame path over all bands; side bands are scaled down before quantization
    """
    bank = bank or default_bank(cfg.num_bands, cfg.pqmf_taps)
    gains = np.ones(cfg.num_bands)
    gains[cfg.core_bands :] = cfg.side_band_scale
    path = FramePath(tuple(range(cfg.num_bands)), cfg.frame_stack, gains)
    return SubbandModel(bank, (path,), cfg.sample_rate)


def _fan_out(function, items: Sequence) -> List:
    if len(items) == 1:
        return [function(items[0])]
    with ThreadPoolExecutor(max_workers=len(items)) as executor:
        return list(executor.map(function, items))


def subband_encode(model: SubbandModel, buf: AudioBuffer) -> LatentSequence:
    """
    Analyze, encode each path concurrently, concatenate in path order
    """
    if buf.sample_rate != model.sample_rate:
        raise ContractError(f"model runs at {model.sample_rate} Hz, input is {buf.sample_rate} Hz")
    sb = analyze(model.bank, buf)
    if sb.num_bands != sum(len(path.bands) for path in model.paths):
        raise ContractError(f"{sb.num_bands} bands do not match the layout")

    latents = _fan_out(lambda path: path.encode(sb.bands[list(path.bands)]), model.paths)
    counts = {latent.shape[0] for latent in latents}
    if len(counts) != 1:
        raise ContractError(f"band paths disagree on frame count: {sorted(counts)}")

    frame_rate = model.frame_rate
    logger.debug("Subband encode", frames=latents[0].shape[0], paths=len(model.paths))
    return LatentSequence.concat([LatentSequence(latent, frame_rate) for latent in latents])


def subband_decode(
    model: SubbandModel, z: LatentSequence, chunk_frames: Optional[int] = None
) -> AudioBuffer:
    """
    Split the latent, decode each path concurrently, reassemble the bands and synthesize
    """
    if z.dim != model.latent_dim:
        raise ContractError(f"latent dimension {z.dim} does not match layout {model.latent_dim}")
    parts = z.split(model.latent_sizes)
    outputs = _fan_out(
        lambda pair: pair[0].decode(pair[1].frames, chunk_frames), list(zip(model.paths, parts))
    )
    lengths = {out.shape[1] for out in outputs}
    if len(lengths) != 1:
        raise ContractError(f"band paths disagree on output length: {sorted(lengths)}")
    bands = np.concatenate(outputs, axis=0)
    return synthesize(model.bank, SubbandSignal(bands, model.sample_rate))


def _check_quantizer(model: SubbandModel, rq: Optional[ResidualQuantizer]) -> ResidualQuantizer:
    if rq is None:
        raise QuantizerStateError("pqmf_direct mode needs fitted codebooks; run `tqcodec fit`")
    if rq.dim != model.latent_dim:
        raise QuantizerStateError(
            f"codebooks were fitted on {rq.dim}-d frames, the layout produces {model.latent_dim}"
        )
    return rq


def pqmf_direct_encode(
    model: SubbandModel, rq: Optional[ResidualQuantizer], buf: AudioBuffer
) -> CodeSequence:
    rq = _check_quantizer(model, rq)
    return quantize(rq, subband_encode(model, buf)).codes


def pqmf_direct_decode(
    model: SubbandModel, rq: Optional[ResidualQuantizer], codes: CodeSequence
) -> AudioBuffer:
    rq = _check_quantizer(model, rq)
    return subband_decode(model, dequantize(rq, codes))
