#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

from .fitting import fit_rsimvq, fit_rvq_kmeans, fit_simvq_projection, kmeans
from .layers import Codebook, SimVectorQuantizer, VectorQuantizer
from .residual import (
    QuantizeResult,
    QuantizerReport,
    ResidualQuantizer,
    dequantize,
    load_quantizer,
    quantize,
    quantizer_diagnostics,
    quantizer_from_store,
    quantizer_to_store,
    save_quantizer,
)

__all__ = [
    "Codebook",
    "VectorQuantizer",
    "SimVectorQuantizer",
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
    "kmeans",
    "fit_rvq_kmeans",
    "fit_simvq_projection",
    "fit_rsimvq",
]
