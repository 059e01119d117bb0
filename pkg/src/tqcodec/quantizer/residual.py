#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Residual cascade of vector quantizers.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import os
from typing import Dict, List, Optional, Tuple, Union

from aws_lambda_powertools import Logger
import numpy as np

from ..constants import SERVICE_NAME
from ..exceptions import (
    CodebookRangeError,
    ContractError,
    QuantizerStateError,
    QuantizerValidationError,
    WeightResolutionError,
)
from ..network.weights import WeightStore, load_weights, save_weights
from ..sequences import CodeSequence, LatentSequence
from .layers import Codebook, SimVectorQuantizer, VectorQuantizer

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = [
    "ResidualQuantizer",
    "QuantizeResult",
    "QuantizerReport",
    "quantize",
    "dequantize",
    "quantizer_diagnostics",
    "quantizer_to_store",
    "quantizer_from_store",
    "save_quantizer",
    "load_quantizer",
]

Stage = Union[VectorQuantizer, SimVectorQuantizer]

PathLike = Union[str, os.PathLike]

CODEBOOK_WEIGHT = 1.0

COMMITMENT_WEIGHT = 0.25


@dataclass(frozen=True, eq=False)
class ResidualQuantizer:
    """
    Nq homogeneous stages sharing input dimension d and codebook size K
    """

    stages: Tuple[Stage, ...]

    def __post_init__(self) -> None:
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages:
            raise QuantizerStateError("residual quantizer has no stages")
        kinds = {type(stage) for stage in stages}
        if len(kinds) != 1:
            raise QuantizerValidationError("stages must all be VQ or all be SimVQ")
        if len({stage.dim for stage in stages}) != 1 or len({stage.size for stage in stages}) != 1:
            raise QuantizerValidationError("stages must share dimension and codebook size")

    @property
    def num_quantizers(self) -> int:
        return len(self.stages)

    @property
    def dim(self) -> int:
        return self.stages[0].dim

    @property
    def codebook_size(self) -> int:
        return self.stages[0].size

    @property
    def kind(self) -> str:
        stage = self.stages[0]
        if isinstance(stage, SimVectorQuantizer):
            return "simvq"
        return "dac" if stage.factorized else "rvq"

    def truncated(self, num_quantizers: int) -> "ResidualQuantizer":
        if not 0 < num_quantizers <= self.num_quantizers:
            raise ContractError(
                f"cannot keep {num_quantizers} of {self.num_quantizers} quantizer stages"
            )
        return ResidualQuantizer(self.stages[:num_quantizers])


@dataclass(frozen=True, eq=False)
class QuantizeResult:
    codes: CodeSequence
    reconstruction: LatentSequence
    # mean squared residual norm after each stage
    residual_energy: np.ndarray
    # [Nq, K] selection counts
    usage: np.ndarray
    final_residual: np.ndarray = field(repr=False)


def _frames(z: Union[LatentSequence, np.ndarray]) -> Tuple[np.ndarray, Fraction]:
    if isinstance(z, LatentSequence):
        return z.frames, z.frame_rate
    frames = np.asarray(z, dtype=np.float64)
    if frames.ndim != 2:
        raise ContractError(f"expected [frames, dim], got shape {frames.shape}")
    return frames, Fraction(1)


def quantize(rq: ResidualQuantizer, z: Union[LatentSequence, np.ndarray]) -> QuantizeResult:
    """
    Stage i codes r_i = z - (e_0 + ... + e_{i-1}); reconstruction is accumulated left to right
    """
    frames, frame_rate = _frames(z)
    if frames.shape[1] != rq.dim:
        raise ContractError(f"latent dimension {frames.shape[1]} does not match quantizer {rq.dim}")
    if not np.all(np.isfinite(frames)):
        raise QuantizerValidationError("latent contains NaN or infinite values")

    count = frames.shape[0]
    indices = np.zeros((count, rq.num_quantizers), dtype=np.int64)
    usage = np.zeros((rq.num_quantizers, rq.codebook_size), dtype=np.int64)
    energy = np.zeros(rq.num_quantizers)

    reconstruction = np.zeros_like(frames)
    residual = frames.copy()
    for index, stage in enumerate(rq.stages):
        selected = stage.encode(residual)
        reconstruction = reconstruction + stage.decode(selected)
        residual = frames - reconstruction
        indices[:, index] = selected
        usage[index] = np.bincount(selected, minlength=rq.codebook_size)
        energy[index] = float(np.mean(np.sum(residual**2, axis=1))) if count else 0.0

    return QuantizeResult(
        CodeSequence(indices, frame_rate),
        LatentSequence(reconstruction, frame_rate),
        energy,
        usage,
        residual,
    )


def dequantize(
    rq: ResidualQuantizer, codes: CodeSequence, n_quantizers: Optional[int] = None
) -> LatentSequence:
    """
    Sum the selected codevectors of the first `n_quantizers` stages (all by default)
    """
    used = codes.num_quantizers if n_quantizers is None else n_quantizers
    if not 0 < used <= min(codes.num_quantizers, rq.num_quantizers):
        raise ContractError(
            f"cannot decode {used} stages from {codes.num_quantizers} coded "
            f"and {rq.num_quantizers} available"
        )
    if codes.indices.size and codes.indices.max() >= rq.codebook_size:
        raise CodebookRangeError(
            f"index {int(codes.indices.max())} outside codebook of {rq.codebook_size}"
        )

    reconstruction = np.zeros((codes.num_frames, rq.dim))
    for index in range(used):
        reconstruction = reconstruction + rq.stages[index].decode(codes.indices[:, index])
    return LatentSequence(reconstruction, codes.frame_rate)


@dataclass(frozen=True)
class QuantizerReport:
    """
    Codebook and commitment terms are numerically identical without gradients
    """

    codebook_loss: float
    commitment_loss: float
    utilization: Tuple[float, ...]
    codebook_weight: float = CODEBOOK_WEIGHT
    commitment_weight: float = COMMITMENT_WEIGHT

    @property
    def weighted(self) -> float:
        return (
            self.codebook_weight * self.codebook_loss
            + self.commitment_weight * self.commitment_loss
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "codebook_loss": self.codebook_loss,
            "commitment_loss": self.commitment_loss,
            "codebook_weight": self.codebook_weight,
            "commitment_weight": self.commitment_weight,
            "utilization": list(self.utilization),
        }


def quantizer_diagnostics(
    rq: ResidualQuantizer,
    z: Union[LatentSequence, np.ndarray],
    z_hat: Union[LatentSequence, np.ndarray],
    codes: Optional[CodeSequence] = None,
) -> QuantizerReport:
    """
    Mean squared error between latent and reconstruction, plus the fraction of each
    stage's codebook selected at least once
    """
    frames, _ = _frames(z)
    reconstructed, _ = _frames(z_hat)
    if frames.shape != reconstructed.shape:
        raise ContractError(f"shape mismatch {frames.shape} vs {reconstructed.shape}")

    mse = float(np.mean((frames - reconstructed) ** 2)) if frames.size else 0.0
    if codes is None:
        codes = quantize(rq, frames).codes
    utilization = tuple(
        float(np.unique(codes.indices[:, stage]).size) / rq.codebook_size
        for stage in range(codes.num_quantizers)
    )
    return QuantizerReport(mse, mse, utilization)


def quantizer_to_store(rq: ResidualQuantizer) -> WeightStore:
    store = WeightStore()
    for index, stage in enumerate(rq.stages):
        if isinstance(stage, SimVectorQuantizer):
            store[f"simvq.stage{index}.base"] = stage.base
            store[f"simvq.stage{index}.proj"] = stage.projection
            continue
        store[f"rvq.stage{index}.codebook"] = stage.codebook.entries
        if stage.factorized:
            store[f"rvq.stage{index}.in_proj"] = stage.in_proj
            store[f"rvq.stage{index}.in_bias"] = stage.in_bias
            store[f"rvq.stage{index}.out_proj"] = stage.out_proj
            store[f"rvq.stage{index}.out_bias"] = stage.out_bias
    return store


def quantizer_from_store(store: WeightStore) -> ResidualQuantizer:
    stages: List[Stage] = []
    while True:
        index = len(stages)
        if f"simvq.stage{index}.base" in store:
            stages.append(
                SimVectorQuantizer(
                    store[f"simvq.stage{index}.base"], store[f"simvq.stage{index}.proj"]
                )
            )
        elif f"rvq.stage{index}.codebook" in store:
            prefix = f"rvq.stage{index}"
            if f"{prefix}.in_proj" in store:
                stages.append(
                    VectorQuantizer(
                        Codebook(store[f"{prefix}.codebook"], normalized=True),
                        store[f"{prefix}.in_proj"],
                        store[f"{prefix}.in_bias"],
                        store[f"{prefix}.out_proj"],
                        store[f"{prefix}.out_bias"],
                    )
                )
            else:
                stages.append(VectorQuantizer(Codebook(store[f"{prefix}.codebook"])))
        else:
            break
    if not stages:
        raise WeightResolutionError("no quantizer stages (rvq.stage0.* or simvq.stage0.*) found")
    return ResidualQuantizer(tuple(stages))


def save_quantizer(
    rq: ResidualQuantizer, path: PathLike, extra: Optional[WeightStore] = None
) -> None:
    store = quantizer_to_store(rq)
    if extra is not None:
        store.update(extra)
    save_weights(store, path)
    logger.info(
        "Saved quantizer",
        path=str(path),
        kind=rq.kind,
        num_quantizers=rq.num_quantizers,
        codebook_size=rq.codebook_size,
    )


def load_quantizer(path: PathLike) -> ResidualQuantizer:
    return quantizer_from_store(load_weights(path))
