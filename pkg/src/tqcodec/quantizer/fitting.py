#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Desk-scale codebook fitting without gradients: Lloyd k-means per residual stage,
* closed-form ridge fits for SimVQ projections.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from aws_lambda_powertools import Logger
import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from ..constants import (
    DAC_CODE_DIM,
    KMEANS_MAX_ITERS,
    KMEANS_TOLERANCE,
    SERVICE_NAME,
    SIMVQ_RIDGE,
)
from ..exceptions import ConditioningError, FittingError
from ..sequences import LatentSequence
from .layers import Codebook, SimVectorQuantizer, VectorQuantizer, l2_normalize, nearest
from .residual import ResidualQuantizer

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = [
    "KMeansResult",
    "ProjectionFit",
    "kmeans",
    "fit_rvq_kmeans",
    "fit_simvq_projection",
    "fit_rsimvq",
]

TrainingData = Union[LatentSequence, np.ndarray]


@dataclass(frozen=True, eq=False)
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    distortion: float
    iterations: int


@dataclass(frozen=True, eq=False)
class ProjectionFit:
    projection: np.ndarray
    residual: float


def _training_matrix(data: TrainingData) -> np.ndarray:
    frames = data.frames if isinstance(data, LatentSequence) else np.asarray(data, np.float64)
    if frames.ndim != 2:
        raise FittingError(f"training data must be [N, d], got shape {frames.shape}")
    if not np.all(np.isfinite(frames)):
        raise FittingError("training data contains NaN or infinite values")
    return frames


def _kmeans_plus_plus(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    count = data.shape[0]
    chosen = [int(rng.integers(count))]
    closest = cdist(data, data[chosen], "sqeuclidean")[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            raise FittingError(f"training data has fewer than {k} distinct vectors")
        pick = int(rng.choice(count, p=closest / total))
        chosen.append(pick)
        closest = np.minimum(closest, cdist(data, data[pick : pick + 1], "sqeuclidean")[:, 0])
    return data[chosen].copy()


def kmeans(
    data: np.ndarray,
    k: int,
    seed: int = 0,
    max_iters: int = KMEANS_MAX_ITERS,
    tolerance: float = KMEANS_TOLERANCE,
    spherical: bool = False,
) -> KMeansResult:
    """
    Lloyd iterations from a k-means++ start

    Empty clusters are re-seeded from the points farthest from their centroid. With
    `spherical`, data and centroids live on the unit sphere (cosine assignment).
    """
    data = np.asarray(data, dtype=np.float64)
    if data.shape[0] < k:
        raise FittingError(f"need at least {k} training vectors, got {data.shape[0]}")
    if spherical:
        data = l2_normalize(data)

    rng = np.random.default_rng(seed)
    centroids = _kmeans_plus_plus(data, k, rng)

    previous = np.inf
    iteration = 0
    for iteration in range(1, max_iters + 1):
        distances = cdist(data, centroids, "sqeuclidean")
        labels = np.argmin(distances, axis=1)
        point_cost = distances[np.arange(data.shape[0]), labels]
        distortion = float(point_cost.mean())

        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, data)
        occupied = counts > 0
        centroids[occupied] = sums[occupied] / counts[occupied, np.newaxis]

        empty = np.flatnonzero(~occupied)
        if empty.size:
            donors = np.argsort(-point_cost, kind="stable")[: empty.size]
            if point_cost[donors].min() <= 0.0:
                raise FittingError(f"training data has fewer than {k} distinct vectors")
            centroids[empty] = data[donors]
            logger.debug("Re-seeded empty clusters", count=int(empty.size), iteration=iteration)

        if spherical:
            centroids = l2_normalize(centroids)

        converged = np.isfinite(previous) and previous - distortion <= tolerance * previous
        if empty.size == 0 and converged:
            break
        previous = distortion

    labels = nearest(data, centroids)
    distortion = float(np.mean(np.sum((data - centroids[labels]) ** 2, axis=1)))
    return KMeansResult(centroids, labels, distortion, iteration)


def _stage_error(frames: np.ndarray, reconstruction: np.ndarray) -> float:
    return float(np.mean(np.sum((frames - reconstruction) ** 2, axis=1)))


def _fit_factorized_stage(
    residual: np.ndarray, k: int, code_dim: int, seed: int, iters: int
) -> VectorQuantizer:
    """
    PCA input projection, spherical k-means in code space, least-squares output projection
    """
    mean = residual.mean(axis=0)
    _, _, vt = linalg.svd(residual - mean, full_matrices=False)
    basis = vt[:code_dim].T
    if basis.shape[1] < code_dim:
        basis = np.pad(basis, ((0, 0), (0, code_dim - basis.shape[1])))
    in_proj = basis
    in_bias = -mean @ basis

    queries = l2_normalize(residual @ in_proj + in_bias)
    fitted = kmeans(queries, k, seed=seed, max_iters=iters, spherical=True)
    codebook = Codebook(fitted.centroids, normalized=True)

    labels = nearest(queries, codebook.entries)
    design = np.hstack([codebook.entries[labels], np.ones((labels.size, 1))])
    solution, _, _, _ = linalg.lstsq(design, residual)
    return VectorQuantizer(codebook, in_proj, in_bias, solution[:-1], solution[-1])


def fit_rvq_kmeans(
    training: TrainingData,
    num_quantizers: int,
    codebook_size: int,
    iters: int = KMEANS_MAX_ITERS,
    seed: int = 0,
    factorized: bool = False,
    code_dim: int = DAC_CODE_DIM,
) -> ResidualQuantizer:
    """
    Fit each stage's codebook on the residuals left by the stages before it
    """
    frames = _training_matrix(training)
    if frames.shape[0] < codebook_size:
        raise FittingError(f"need at least {codebook_size} training vectors, got {frames.shape[0]}")

    stages: List[VectorQuantizer] = []
    reconstruction = np.zeros_like(frames)
    for index in range(num_quantizers):
        residual = frames - reconstruction
        if factorized:
            stage = _fit_factorized_stage(residual, codebook_size, code_dim, seed + index, iters)
        else:
            fitted = kmeans(residual, codebook_size, seed=seed + index, max_iters=iters)
            stage = VectorQuantizer(Codebook(fitted.centroids))
        stages.append(stage)
        reconstruction = reconstruction + stage.decode(stage.encode(residual))
        logger.info(
            "Fitted quantizer stage",
            stage=index,
            residual_energy=_stage_error(frames, reconstruction),
            factorized=factorized,
        )
    return ResidualQuantizer(tuple(stages))


def fit_simvq_projection(
    layer: SimVectorQuantizer,
    targets: np.ndarray,
    ridge: float = SIMVQ_RIDGE,
    weights: Optional[np.ndarray] = None,
) -> ProjectionFit:
    """
    W = argmin sum_k w_k ||C_k W - T_k||^2 + ridge ||W||_F^2 in closed form

    The frozen base C is read, never written.
    """
    base = layer.base
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != base.shape:
        raise FittingError(f"targets must be {base.shape}, got {targets.shape}")
    weights = np.ones(base.shape[0]) if weights is None else np.asarray(weights, np.float64)

    weighted_base = base * weights[:, np.newaxis]
    gram = base.T @ weighted_base + ridge * np.eye(layer.dim)
    if ridge <= 0.0 and np.linalg.matrix_rank(gram) < layer.dim:
        raise ConditioningError("base codebook is rank deficient; use a positive ridge")
    try:
        projection = linalg.solve(gram, weighted_base.T @ targets, assume_a="pos")
    except linalg.LinAlgError as error:
        raise ConditioningError(f"normal equations are singular: {error}")

    misfit = base @ projection - targets
    residual = float(np.sum(weights[:, np.newaxis] * misfit**2))
    return ProjectionFit(projection, residual)


def _refine_simvq(
    layer: SimVectorQuantizer,
    residual: np.ndarray,
    ridge: float,
    iters: int,
    tolerance: float,
) -> Tuple[SimVectorQuantizer, float]:
    """
    Alternate nearest assignment with count-weighted refits of the projection
    """
    previous = np.inf
    error = _stage_error(residual, layer.decode(layer.encode(residual)))
    for _ in range(max(1, iters)):
        labels = layer.encode(residual)
        counts = np.bincount(labels, minlength=layer.size).astype(np.float64)
        sums = np.zeros((layer.size, layer.dim))
        np.add.at(sums, labels, residual)
        means = np.divide(sums, np.maximum(counts, 1.0)[:, np.newaxis])

        fit = fit_simvq_projection(layer, means, ridge=ridge, weights=counts)
        candidate = layer.with_projection(fit.projection)
        candidate_error = _stage_error(residual, candidate.decode(candidate.encode(residual)))
        if candidate_error > error:
            break
        layer, previous, error = candidate, error, candidate_error
        if np.isfinite(previous) and previous - error <= tolerance * previous:
            break
    return layer, error


def fit_rsimvq(
    training: TrainingData,
    num_quantizers: int,
    codebook_size: int,
    iters: int = KMEANS_MAX_ITERS,
    seed: int = 0,
    ridge: float = SIMVQ_RIDGE,
    tolerance: float = KMEANS_TOLERANCE,
) -> ResidualQuantizer:
    """
    Residual SimVQ: per stage a seeded frozen base, a projection fitted to k-means centroids
    of the stage residual, then refined against the residual itself
    """
    frames = _training_matrix(training)
    if frames.shape[0] < codebook_size:
        raise FittingError(f"need at least {codebook_size} training vectors, got {frames.shape[0]}")

    stages: List[SimVectorQuantizer] = []
    reconstruction = np.zeros_like(frames)
    for index in range(num_quantizers):
        residual = frames - reconstruction
        layer = SimVectorQuantizer.create(codebook_size, frames.shape[1], seed + index)
        centroids = kmeans(residual, codebook_size, seed=seed + index, max_iters=iters).centroids
        layer = layer.with_projection(fit_simvq_projection(layer, centroids, ridge).projection)
        layer, error = _refine_simvq(layer, residual, ridge, iters, tolerance)

        stages.append(layer)
        reconstruction = reconstruction + layer.decode(layer.encode(residual))
        logger.info("Fitted SimVQ stage", stage=index, residual_energy=error)
    return ResidualQuantizer(tuple(stages))
