#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* End-to-end codec for the three operating modes. Channels are coded as independent
* mono pipelines and serialized into one stream.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
from typing import Callable, List, Optional, Sequence, TypeVar

from aws_lambda_powertools import Logger
import numpy as np

from .audio import AudioBuffer
from .bitstream import BitstreamHeader, pack, unpack
from .config import CodecConfig
from .constants import SERVICE_NAME
from .exceptions import ContractError, FittingError, QuantizerStateError
from .network.builders import build_decoder, build_encoder
from .network.forward import forward, streaming_decode
from .network.graph import NetworkGraph
from .network.weights import WeightStore, init_weights
from .quantizer.fitting import fit_rsimvq, fit_rvq_kmeans
from .quantizer.residual import ResidualQuantizer, dequantize, quantize
from .sequences import CodeSequence, LatentSequence
from .subband import (
    SubbandModel,
    build_subband_model,
    pqmf_direct_model,
    subband_decode,
    subband_encode,
)

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = ["Codec", "fit_codebooks"]

T = TypeVar("T")


def _per_channel(function: Callable[[int], T], channels: int) -> List[T]:
    """
    One worker per channel; results come back in channel order
    """
    if channels == 1:
        return [function(0)]
    with ThreadPoolExecutor(max_workers=channels) as executor:
        return list(executor.map(function, range(channels)))


@dataclass(frozen=True, eq=False)
class Codec:
    cfg: CodecConfig
    quantizer: Optional[ResidualQuantizer] = None
    weights: WeightStore = field(default_factory=WeightStore, repr=False)
    encoder: Optional[NetworkGraph] = field(default=None, init=False, repr=False)
    decoder: Optional[NetworkGraph] = field(default=None, init=False, repr=False)
    subband: Optional[SubbandModel] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        cfg = self.cfg
        if cfg.mode == "seanet":
            encoder, decoder = build_encoder(cfg), build_decoder(cfg)
            weights = self.weights
            if not any(name.startswith(f"{encoder.name}.") for name in weights):
                weights = WeightStore(dict(weights.items()))
                weights.update(init_weights(encoder, seed=cfg.seed))
                weights.update(init_weights(decoder, seed=cfg.seed + 1))
                logger.info("Initialized network weights", seed=cfg.seed, mode=cfg.mode)
            weights.check(encoder)
            weights.check(decoder)
            object.__setattr__(self, "weights", weights)
            object.__setattr__(self, "encoder", encoder)
            object.__setattr__(self, "decoder", decoder)
        elif cfg.mode == "subband_seanet":
            has_weights = any(name.startswith("core.") for name in self.weights)
            model = build_subband_model(cfg, self.weights if has_weights else None)
            object.__setattr__(self, "subband", model)
            object.__setattr__(self, "weights", model.paths[0].weights)
        else:
            object.__setattr__(self, "subband", pqmf_direct_model(cfg))

        if self.quantizer is not None:
            object.__setattr__(self, "quantizer", self._matched(self.quantizer))

    def _matched(self, rq: ResidualQuantizer) -> ResidualQuantizer:
        cfg = self.cfg
        if rq.dim != cfg.quantizer_dim or rq.codebook_size != cfg.codebook_size:
            raise QuantizerStateError(
                f"codebooks are {rq.num_quantizers}x{rq.codebook_size} over {rq.dim}-d frames; "
                f"mode {cfg.mode} needs {cfg.codebook_size} entries over {cfg.quantizer_dim}-d"
            )
        if rq.num_quantizers < cfg.num_quantizers:
            raise QuantizerStateError(
                f"codebooks hold {rq.num_quantizers} stages, {cfg.num_quantizers} requested"
            )
        return rq.truncated(cfg.num_quantizers)

    def _require_quantizer(self) -> ResidualQuantizer:
        if self.quantizer is None:
            raise QuantizerStateError(
                f"mode {self.cfg.mode} needs fitted codebooks; create them with `tqcodec fit`"
            )
        return self.quantizer

    @property
    def delay(self) -> int:
        return 0 if self.subband is None else self.subband.delay

    def padded_length(self, num_samples: int) -> int:
        stride = self.cfg.total_stride
        return math.ceil((num_samples + self.delay) / stride) * stride

    def latents(self, buf: AudioBuffer) -> LatentSequence:
        """
        Continuous latents for one channel after padding to whole frames
        """
        if buf.num_channels != 1:
            raise ContractError(f"latents are computed per channel, got {buf.num_channels}")
        if buf.sample_rate != self.cfg.sample_rate:
            raise ContractError(
                f"codec runs at {self.cfg.sample_rate} Hz, input is {buf.sample_rate} Hz"
            )
        padded = np.zeros((1, self.padded_length(buf.num_samples)))
        padded[:, : buf.num_samples] = buf.samples
        if self.subband is not None:
            return subband_encode(self.subband, AudioBuffer(padded, buf.sample_rate))
        return LatentSequence.from_channels_first(
            forward(self.encoder, self.weights, padded), self.cfg.frame_rate
        )

    def synthesize(
        self, z: LatentSequence, num_samples: int, chunk_frames: Optional[int] = None
    ) -> np.ndarray:
        """
        Decode latents for one channel and trim to `num_samples`
        """
        if self.subband is not None:
            out = subband_decode(self.subband, z, chunk_frames).samples[0]
        elif chunk_frames is None or z.num_frames == 0:
            out = forward(self.decoder, self.weights, z.channels_first())[0]
        else:
            blocks = streaming_decode(self.decoder, self.weights, z, chunk_frames)
            out = np.concatenate([block[0] for block in blocks])
        return out[self.delay : self.delay + num_samples]

    def encode_codes(self, buf: AudioBuffer) -> List[CodeSequence]:
        rq = self._require_quantizer()
        return _per_channel(
            lambda channel: quantize(rq, self.latents(buf.mono(channel))).codes,
            buf.num_channels,
        )

    def encode(self, buf: AudioBuffer) -> bytes:
        codes = self.encode_codes(buf)
        header = BitstreamHeader(
            sample_rate=buf.sample_rate,
            channels=buf.num_channels,
            mode=self.cfg.mode,
            num_quantizers=self.cfg.num_quantizers,
            codebook_bits=self.cfg.codebook_bits,
            total_stride=self.cfg.total_stride,
            original_length=buf.num_samples,
            frame_count=codes[0].num_frames,
        )
        data = pack(header, codes)
        logger.info(
            "Encoded audio",
            channels=buf.num_channels,
            samples=buf.num_samples,
            frames=header.frame_count,
            bytes=len(data),
        )
        return data

    def _check_header(self, header: BitstreamHeader) -> None:
        cfg = self.cfg
        expected = {
            "sample_rate": cfg.sample_rate,
            "mode": cfg.mode,
            "codebook_bits": cfg.codebook_bits,
            "total_stride": cfg.total_stride,
        }
        for name, value in expected.items():
            if getattr(header, name) != value:
                raise ContractError(
                    f"stream {name}={getattr(header, name)} does not match the codec ({value})"
                )
        if header.num_quantizers > self._require_quantizer().num_quantizers:
            raise ContractError(
                f"stream uses {header.num_quantizers} stages, codebooks provide "
                f"{self._require_quantizer().num_quantizers}"
            )
        if header.frame_count * cfg.total_stride < self.padded_length(header.original_length):
            raise ContractError(f"stream has too few frames for {header.original_length} samples")

    def decode_codes(
        self,
        codes: Sequence[CodeSequence],
        num_samples: int,
        chunk_frames: Optional[int] = None,
    ) -> AudioBuffer:
        rq = self._require_quantizer()
        channels = _per_channel(
            lambda channel: self.synthesize(
                dequantize(rq, codes[channel]), num_samples, chunk_frames
            ),
            len(codes),
        )
        return AudioBuffer(np.stack(channels), self.cfg.sample_rate)

    def decode(self, data: bytes, chunk_frames: Optional[int] = None) -> AudioBuffer:
        header, codes = unpack(data)
        self._check_header(header)
        buf = self.decode_codes(codes, header.original_length, chunk_frames)
        logger.info(
            "Decoded stream",
            channels=header.channels,
            samples=header.original_length,
            streaming_chunk=chunk_frames,
        )
        return buf


def fit_codebooks(
    cfg: CodecConfig,
    buffers: Sequence[AudioBuffer],
    weights: Optional[WeightStore] = None,
    iters: Optional[int] = None,
) -> Codec:
    """
    Fit residual codebooks on the latents of every channel of `buffers`

    The returned codec carries the network weights the latents were computed with.
    """
    codec = Codec(cfg, weights=weights or WeightStore())
    parts = [codec.latents(channel) for buf in buffers for channel in buf.channels()]
    if not parts:
        raise FittingError("no training audio")
    training = LatentSequence(np.concatenate([part.frames for part in parts]), cfg.frame_rate)

    if training.num_frames < cfg.codebook_size:
        seconds = cfg.codebook_size * cfg.total_stride / cfg.sample_rate
        raise FittingError(
            f"{training.num_frames} frames cannot fit {cfg.codebook_size} codebook entries; "
            f"provide at least {seconds:.2f} s of audio"
        )

    options = {} if iters is None else {"iters": iters}
    logger.info(
        "Fitting codebooks",
        kind=cfg.quantizer,
        frames=training.num_frames,
        dim=training.dim,
        num_quantizers=cfg.num_quantizers,
    )
    if cfg.quantizer == "simvq":
        rq = fit_rsimvq(training, cfg.num_quantizers, cfg.codebook_size, seed=cfg.seed, **options)
    else:
        rq = fit_rvq_kmeans(
            training,
            cfg.num_quantizers,
            cfg.codebook_size,
            seed=cfg.seed,
            factorized=cfg.quantizer == "dac",
            code_dim=cfg.code_dim,
            **options,
        )
    return Codec(cfg, rq, codec.weights)
