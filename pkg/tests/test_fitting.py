#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

import numpy as np
import pytest

from tqcodec.exceptions import ConditioningError, FittingError
from tqcodec.quantizer.fitting import fit_rsimvq, fit_rvq_kmeans, fit_simvq_projection, kmeans
from tqcodec.quantizer.layers import SimVectorQuantizer
from tqcodec.quantizer.residual import dequantize, quantize

CENTRES = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]])


@pytest.fixture
def clusters(rng):
    points = [centre + 0.05 * rng.standard_normal((100, 2)) for centre in CENTRES]
    return np.concatenate(points)


def _sorted_rows(a):
    return a[np.lexsort(a.T[::-1])]


def test_kmeans_finds_separated_clusters(clusters):
    result = kmeans(clusters, 4, seed=0)
    np.testing.assert_allclose(_sorted_rows(result.centroids), CENTRES, atol=0.05)
    assert np.bincount(result.labels).tolist() == [100, 100, 100, 100]
    assert result.distortion < 0.02


def test_single_centroid_is_the_mean(rng):
    data = rng.standard_normal((50, 3)) + 2.0
    result = kmeans(data, 1)
    np.testing.assert_allclose(result.centroids[0], data.mean(axis=0), atol=1e-12)


def test_too_few_vectors(rng):
    with pytest.raises(FittingError):
        kmeans(rng.standard_normal((3, 2)), 4)
    with pytest.raises(FittingError):
        fit_rvq_kmeans(rng.standard_normal((3, 2)), 2, 4)


def test_too_few_distinct_vectors():
    with pytest.raises(FittingError):
        kmeans(np.ones((10, 2)), 3)


def test_non_finite_training_data(rng):
    data = rng.standard_normal((20, 2))
    data[0, 0] = np.inf
    with pytest.raises(FittingError):
        fit_rvq_kmeans(data, 1, 4)


def test_second_stage_lowers_energy(rng):
    data = rng.standard_normal((400, 4))
    rq = fit_rvq_kmeans(data, 2, 16, seed=1)
    energy = quantize(rq, data).residual_energy
    assert energy[1] < energy[0] < np.mean(np.sum(data**2, axis=1))


def test_rvq_fit_is_deterministic(rng):
    data = rng.standard_normal((200, 3))
    first = fit_rvq_kmeans(data, 2, 8, seed=4)
    second = fit_rvq_kmeans(data, 2, 8, seed=4)
    for a, b in zip(first.stages, second.stages):
        np.testing.assert_array_equal(a.codebook.entries, b.codebook.entries)


def test_projection_recovers_identity():
    layer = SimVectorQuantizer.create(32, 4, seed=0)
    fit = fit_simvq_projection(layer, layer.base, ridge=0.0)
    np.testing.assert_allclose(fit.projection, np.eye(4), atol=1e-6)
    assert fit.residual == pytest.approx(0.0, abs=1e-10)


def test_projection_recovers_planted_matrix(rng):
    layer = SimVectorQuantizer.create(64, 6, seed=1)
    planted = rng.standard_normal((6, 6))
    fit = fit_simvq_projection(layer, layer.base @ planted, ridge=0.0)
    np.testing.assert_allclose(fit.projection, planted, atol=1e-5)


def test_ridge_shrinks_projection(rng):
    layer = SimVectorQuantizer.create(16, 4, seed=2)
    targets = rng.standard_normal((16, 4))
    loose = fit_simvq_projection(layer, targets, ridge=0.0)
    tight = fit_simvq_projection(layer, targets, ridge=10.0)
    assert np.linalg.norm(tight.projection) < np.linalg.norm(loose.projection)
    assert tight.residual > loose.residual


def test_projection_leaves_base_untouched(rng):
    layer = SimVectorQuantizer.create(16, 4, seed=3)
    before = layer.base_checksum()
    fit_simvq_projection(layer, rng.standard_normal((16, 4)))
    assert layer.base_checksum() == before


def test_rank_deficient_base_without_ridge():
    base = np.zeros((8, 3))
    base[:, 0] = np.arange(8)
    layer = SimVectorQuantizer(base, np.eye(3))
    with pytest.raises(ConditioningError):
        fit_simvq_projection(layer, base, ridge=0.0)


def test_projection_target_shape():
    layer = SimVectorQuantizer.create(8, 2, seed=0)
    with pytest.raises(FittingError):
        fit_simvq_projection(layer, np.zeros((8, 3)))


@pytest.mark.parametrize("fit", [fit_rsimvq, fit_rvq_kmeans], ids=["rsimvq", "rvq"])
def test_held_out_energy_decreases_with_stages(fit):
    training = np.random.default_rng(1).standard_normal((2000, 4))
    held_out = np.random.default_rng(2).standard_normal((1000, 4))
    rq = fit(training, 3, 16, seed=0)

    result = quantize(rq, held_out)
    energy = result.residual_energy
    assert energy[0] < np.mean(np.sum(held_out**2, axis=1))
    assert all(later < earlier for earlier, later in zip(energy[:-1], energy[1:]))

    errors = [
        np.mean(np.sum((held_out - dequantize(rq, result.codes, n_quantizers=m).frames) ** 2, 1))
        for m in (1, 2, 3)
    ]
    np.testing.assert_allclose(errors, energy, rtol=1e-9)


def test_rsimvq_is_deterministic(rng):
    data = rng.standard_normal((120, 3))
    first = fit_rsimvq(data, 2, 8, seed=9)
    second = fit_rsimvq(data, 2, 8, seed=9)
    assert first.kind == "simvq"
    for a, b in zip(first.stages, second.stages):
        np.testing.assert_array_equal(a.projection, b.projection)
        assert a.base_checksum() == b.base_checksum()


def test_factorized_fit(rng):
    data = rng.standard_normal((300, 8)) + 1.0
    rq = fit_rvq_kmeans(data, 2, 8, seed=0, factorized=True, code_dim=2)
    assert rq.kind == "dac"
    assert rq.dim == 8
    assert rq.stages[0].codebook.dim == 2
    norms = np.linalg.norm(rq.stages[0].codebook.entries, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-6)
    energy = quantize(rq, data).residual_energy
    assert energy[0] < np.mean(np.sum(data**2, axis=1))
