#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

from fractions import Fraction

import numpy as np
import pytest

from tests.oracles import brute_force_nearest
from tqcodec.exceptions import (
    CodebookRangeError,
    ContractError,
    QuantizerStateError,
    QuantizerValidationError,
    WeightResolutionError,
)
from tqcodec.network.weights import WeightStore
from tqcodec.quantizer.layers import Codebook, SimVectorQuantizer, VectorQuantizer, nearest
from tqcodec.quantizer.residual import (
    ResidualQuantizer,
    dequantize,
    load_quantizer,
    quantize,
    quantizer_diagnostics,
    quantizer_from_store,
    quantizer_to_store,
    save_quantizer,
)
from tqcodec.sequences import CodeSequence, LatentSequence


def _rvq(rng, num_quantizers=3, size=8, dim=4, scale=1.0):
    stages = []
    for _ in range(num_quantizers):
        stages.append(VectorQuantizer(Codebook(rng.standard_normal((size, dim)) * scale)))
        scale *= 0.3
    return ResidualQuantizer(tuple(stages))


def test_single_stage_reproduces_codevector(rng):
    rq = _rvq(rng, num_quantizers=1)
    entries = rq.stages[0].codebook.entries
    z = entries[[5, 0, 5, 7]]
    result = quantize(rq, z)
    np.testing.assert_array_equal(result.codes.indices[:, 0], [5, 0, 5, 7])
    np.testing.assert_array_equal(result.reconstruction.frames, z)
    assert not np.any(result.final_residual)


def test_residuals_telescope(rng):
    rq = _rvq(rng)
    z = rng.standard_normal((10000, 4))
    result = quantize(rq, z)
    np.testing.assert_array_equal(z - result.reconstruction.frames, result.final_residual)
    assert result.residual_energy.shape == (3,)
    assert result.usage.sum(axis=1).tolist() == [10000, 10000, 10000]


def test_quantize_on_grid_matches_brute_force():
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    rq = ResidualQuantizer(
        (VectorQuantizer(Codebook(corners)), VectorQuantizer(Codebook(0.5 * corners - 0.25)))
    )
    # every point of a 0.05 grid over [-0.5, 1.5]^2, ties included
    axis = np.arange(-10, 31) / 20.0
    grid = np.stack(np.meshgrid(axis, axis), axis=-1).reshape(-1, 2)

    codes = quantize(rq, grid).codes.indices
    first = brute_force_nearest(grid, corners)
    np.testing.assert_array_equal(codes[:, 0], first)
    second = brute_force_nearest(grid - corners[first], 0.5 * corners - 0.25)
    np.testing.assert_array_equal(codes[:, 1], second)


def test_ties_go_to_lowest_index():
    entries = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert nearest(np.zeros((1, 2)), entries).tolist() == [0]


def test_dequantize_matches_reconstruction(rng):
    rq = _rvq(rng)
    z = LatentSequence(rng.standard_normal((30, 4)), Fraction(689))
    result = quantize(rq, z)
    restored = dequantize(rq, result.codes)
    np.testing.assert_array_equal(restored.frames, result.reconstruction.frames)
    assert restored.frame_rate == 689


def test_dequantize_prefix_uses_fewer_stages(rng):
    rq = _rvq(rng)
    z = rng.standard_normal((30, 4))
    codes = quantize(rq, z).codes
    first = dequantize(rq, codes, n_quantizers=1)
    np.testing.assert_allclose(first.frames, rq.stages[0].decode(codes.indices[:, 0]))
    with pytest.raises(ContractError):
        dequantize(rq, codes, n_quantizers=4)


def test_index_out_of_range(rng):
    rq = _rvq(rng, size=8)
    codes = CodeSequence(np.array([[1, 2, 8]]), 689)
    with pytest.raises(CodebookRangeError):
        dequantize(rq, codes)


def test_empty_latent(rng):
    rq = _rvq(rng)
    result = quantize(rq, np.zeros((0, 4)))
    assert result.codes.indices.shape == (0, 3)
    assert result.reconstruction.num_frames == 0
    assert dequantize(rq, result.codes).num_frames == 0


def test_non_finite_latent(rng):
    z = rng.standard_normal((5, 4))
    z[2, 1] = np.nan
    with pytest.raises(QuantizerValidationError):
        quantize(_rvq(rng), z)


def test_dimension_mismatch(rng):
    with pytest.raises(ContractError):
        quantize(_rvq(rng), np.zeros((3, 5)))


def test_stages_must_agree(rng):
    with pytest.raises(QuantizerStateError):
        ResidualQuantizer(())
    with pytest.raises(QuantizerValidationError):
        ResidualQuantizer(
            (
                VectorQuantizer(Codebook(rng.standard_normal((8, 4)))),
                VectorQuantizer(Codebook(rng.standard_normal((4, 4)))),
            )
        )
    with pytest.raises(QuantizerValidationError):
        ResidualQuantizer(
            (
                VectorQuantizer(Codebook(rng.standard_normal((8, 4)))),
                SimVectorQuantizer.create(8, 4, seed=0),
            )
        )


def test_codebook_validation(rng):
    with pytest.raises(QuantizerValidationError):
        Codebook(np.array([[np.inf, 0.0]]))
    duplicated = Codebook(np.array([[1.0, 2.0], [1.0, 2.0]]))
    with pytest.raises(QuantizerValidationError):
        duplicated.validate()
    with pytest.raises(QuantizerValidationError):
        Codebook(np.array([[2.0, 0.0]]), normalized=True).validate()


def test_factorized_lookup_uses_projected_space(rng):
    entries = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    in_proj = np.eye(4)[:, :2]
    out_proj = np.eye(4)[:2, :] * 3
    stage = VectorQuantizer(Codebook(entries, normalized=True), in_proj, None, out_proj, None)
    assert stage.factorized and stage.dim == 4
    r = np.array([[5.0, 0.1, 9.0, 9.0], [-0.2, -4.0, 0.0, 0.0]])
    indices = stage.encode(r)
    assert indices.tolist() == [0, 2]
    np.testing.assert_allclose(stage.decode(indices), [[3, 0, 0, 0], [-3, 0, 0, 0]])


def test_simvq_effective_codebook(rng):
    stage = SimVectorQuantizer.create(16, 4, seed=3)
    np.testing.assert_allclose(stage.effective, stage.base)
    projection = rng.standard_normal((4, 4))
    moved = stage.with_projection(projection)
    np.testing.assert_allclose(moved.effective, stage.base @ moved.projection)
    assert moved.base_checksum() == stage.base_checksum()
    with pytest.raises(QuantizerValidationError):
        stage.with_projection(np.eye(3))


def test_diagnostics_zero_when_exact(rng):
    rq = _rvq(rng, num_quantizers=1)
    z = rq.stages[0].codebook.entries[:3]
    report = quantizer_diagnostics(rq, z, quantize(rq, z).reconstruction)
    assert report.codebook_loss == 0.0
    assert report.commitment_loss == 0.0
    assert report.weighted == 0.0


def test_single_frame_utilization(rng):
    rq = _rvq(rng, size=8)
    z = rng.standard_normal((1, 4))
    result = quantize(rq, z)
    report = quantizer_diagnostics(rq, z, result.reconstruction, result.codes)
    assert report.utilization == (1 / 8, 1 / 8, 1 / 8)


def test_diagnostics_mse(rng):
    rq = _rvq(rng)
    z = rng.standard_normal((40, 4))
    z_hat = quantize(rq, z).reconstruction
    report = quantizer_diagnostics(rq, z, z_hat)
    expected = sum((a - b) ** 2 for a, b in zip(z.ravel(), z_hat.frames.ravel())) / z.size
    assert report.codebook_loss == pytest.approx(expected, rel=1e-12)
    assert report.weighted == pytest.approx(1.25 * expected, rel=1e-12)
    assert set(report.to_dict()) >= {"codebook_loss", "commitment_loss", "utilization"}


def test_diagnostics_shape_mismatch(rng):
    rq = _rvq(rng)
    with pytest.raises(ContractError):
        quantizer_diagnostics(rq, np.zeros((3, 4)), np.zeros((2, 4)))


@pytest.mark.parametrize("kind", ["rvq", "simvq"])
def test_save_and_load(tmp_path, rng, kind):
    if kind == "rvq":
        rq = _rvq(rng)
    else:
        rq = ResidualQuantizer(tuple(SimVectorQuantizer.create(8, 4, seed=s) for s in range(2)))
    path = tmp_path / "codebooks.tqcw"
    save_quantizer(rq, path, extra=WeightStore({"encoder.x": np.zeros(2)}))
    loaded = load_quantizer(path)
    assert loaded.kind == kind
    assert loaded.num_quantizers == rq.num_quantizers
    z = rng.standard_normal((25, 4))
    assert quantize(loaded, z).codes == quantize(rq, z).codes


def test_store_without_stages():
    with pytest.raises(WeightResolutionError):
        quantizer_from_store(WeightStore({"encoder.x": np.zeros(1)}))


def test_store_keys(rng):
    store = quantizer_to_store(_rvq(rng, num_quantizers=2))
    assert store.names() == ["rvq.stage0.codebook", "rvq.stage1.codebook"]


def test_truncated(rng):
    rq = _rvq(rng)
    two = rq.truncated(2)
    assert two.num_quantizers == 2
    assert two.stages[1] is rq.stages[1]
    with pytest.raises(ContractError):
        rq.truncated(0)
    with pytest.raises(ContractError):
        rq.truncated(4)
