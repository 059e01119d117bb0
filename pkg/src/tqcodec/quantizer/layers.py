#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Single-stage vector quantizers. Parameters are held at float32 precision so they
* survive the weight container bit-exactly; arithmetic runs in float64.
"""

from dataclasses import dataclass, field
import hashlib
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ..exceptions import CodebookRangeError, QuantizerValidationError

__all__ = ["Codebook", "VectorQuantizer", "SimVectorQuantizer", "nearest", "l2_normalize"]


def _stored(array: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if array is None:
        return None
    out = np.asarray(array, dtype=np.float32).astype(np.float64)
    out.setflags(write=False)
    return out


def l2_normalize(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    return x / np.maximum(norms, 1e-12)


def nearest(queries: np.ndarray, entries: np.ndarray) -> np.ndarray:
    """
    Index of the closest entry by squared Euclidean distance; ties go to the lowest index
    """
    if queries.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmin(cdist(queries, entries, "sqeuclidean"), axis=1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Codebook:
    """
    K entries of dimension d; `normalized` rows have unit L2 norm
    """

    entries: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _stored(self.entries))
        if self.entries.ndim != 2 or self.entries.shape[0] < 1:
            raise QuantizerValidationError(f"codebook must be [K, d], got {self.entries.shape}")
        if not np.all(np.isfinite(self.entries)):
            raise QuantizerValidationError("codebook contains NaN or infinite values")

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def dim(self) -> int:
        return self.entries.shape[1]

    def validate(self) -> None:
        if self.size > 1 and pdist(self.entries, "sqeuclidean").min() <= 0.0:
            raise QuantizerValidationError("codebook has duplicate entries")
        if self.normalized:
            norms = np.linalg.norm(self.entries, axis=1)
            if np.max(np.abs(norms - 1.0)) > 1e-6:
                raise QuantizerValidationError("normalized codebook rows must have unit norm")


@dataclass(frozen=True, eq=False)
class VectorQuantizer:
    """
    Nearest-neighbour VQ. With projections it performs the factorized lookup:
    queries r @ in_proj + in_bias are L2-normalized and matched against unit rows,
    and the selected row is mapped back with out_proj / out_bias.
    """

    codebook: Codebook
    in_proj: Optional[np.ndarray] = None
    in_bias: Optional[np.ndarray] = None
    out_proj: Optional[np.ndarray] = None
    out_bias: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        for name in ("in_proj", "in_bias", "out_proj", "out_bias"):
            object.__setattr__(self, name, _stored(getattr(self, name)))
        if self.factorized:
            code_dim = self.codebook.dim
            if self.in_proj is None or self.out_proj is None:
                raise QuantizerValidationError("factorized lookup needs in_proj and out_proj")
            if self.in_proj.shape[1] != code_dim or self.out_proj.shape[0] != code_dim:
                raise QuantizerValidationError(
                    f"projections {self.in_proj.shape}/{self.out_proj.shape} "
                    f"do not match code dimension {code_dim}"
                )
            if self.in_bias is None:
                object.__setattr__(self, "in_bias", _stored(np.zeros(code_dim)))
            if self.out_bias is None:
                object.__setattr__(self, "out_bias", _stored(np.zeros(self.out_proj.shape[1])))

    @property
    def factorized(self) -> bool:
        return self.codebook.normalized or self.in_proj is not None

    @property
    def size(self) -> int:
        return self.codebook.size

    @property
    def dim(self) -> int:
        return self.out_proj.shape[1] if self.factorized else self.codebook.dim

    def project(self, r: np.ndarray) -> np.ndarray:
        """
        Lookup-space queries for residuals r [N, d]
        """
        if not self.factorized:
            return r
        return l2_normalize(r @ self.in_proj + self.in_bias)

    def encode(self, r: np.ndarray) -> np.ndarray:
        return nearest(self.project(r), self.codebook.entries)

    def decode(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.size):
            raise CodebookRangeError(f"index outside [0, {self.size})")
        rows = self.codebook.entries[indices]
        if not self.factorized:
            return rows
        return rows @ self.out_proj + self.out_bias


@dataclass(frozen=True, eq=False)
class SimVectorQuantizer:
    """
    Frozen base codebook C [K, d] and projection W [d, d]; the effective codebook is C @ W
    """

    base: np.ndarray
    projection: np.ndarray
    effective: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", _stored(self.base))
        object.__setattr__(self, "projection", _stored(self.projection))
        size, dim = self.base.shape
        if self.projection.shape != (dim, dim):
            raise QuantizerValidationError(
                f"projection must be [{dim}, {dim}], got {self.projection.shape}"
            )
        if not (np.all(np.isfinite(self.base)) and np.all(np.isfinite(self.projection))):
            raise QuantizerValidationError("SimVQ parameters contain NaN or infinite values")
        effective = self.base @ self.projection
        effective.setflags(write=False)
        object.__setattr__(self, "effective", effective)

    @classmethod
    def create(cls, size: int, dim: int, seed: int) -> "SimVectorQuantizer":
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal((size, dim)) / np.sqrt(dim), np.eye(dim))

    @property
    def size(self) -> int:
        return self.base.shape[0]

    @property
    def dim(self) -> int:
        return self.base.shape[1]

    def base_checksum(self) -> str:
        return hashlib.sha256(self.base.tobytes()).hexdigest()

    def with_projection(self, projection: np.ndarray) -> "SimVectorQuantizer":
        return SimVectorQuantizer(self.base, projection)

    def encode(self, r: np.ndarray) -> np.ndarray:
        return nearest(r, self.effective)

    def decode(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.size):
            raise CodebookRangeError(f"index outside [0, {self.size})")
        return self.effective[indices]
