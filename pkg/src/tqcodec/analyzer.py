#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Static compute and latency analysis of network graphs.
*
* MACs count multiplies only (no biases, no activations) per second of input audio.
* Receptive fields follow the convolutional path; recurrent layers are flagged `stateful`.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from aws_lambda_powertools import Logger
import numpy as np

from .bitstream import bitrate_for, frame_rate_for
from .config import PRESETS, CodecConfig, preset
from .constants import DECODE_BUDGET_GMACS, SERVICE_NAME
from .exceptions import AnalysisError
from .network.graph import (
    Conv1d,
    Elu,
    Layer,
    Lstm,
    NetworkGraph,
    Residual,
    Tanh,
    TransposedConv1d,
)
from .subband import SubbandLayout, build_subband_graphs

logger = Logger(service=SERVICE_NAME, child=True)

__all__ = [
    "LayerRow",
    "BudgetReport",
    "BudgetVerdict",
    "SubbandBudget",
    "count_macs",
    "receptive_field",
    "compare_budget",
    "budget_table",
    "subband_budget",
    "preset_rows",
    "preset_table",
]

GIGA = 1e9


@dataclass(frozen=True)
class LayerRow:
    name: str
    kind: str
    in_channels: int
    out_channels: int
    rate: Fraction
    macs: float
    cumulative_rf: int


@dataclass(frozen=True)
class BudgetReport:
    name: str
    sample_rate: Union[int, Fraction]
    rows: Tuple[LayerRow, ...]
    receptive_field: int
    lookahead: int
    stateful: bool
    downsampling: int = 1
    upsampling: int = 1
    total_macs: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "total_macs", float(sum(row.macs for row in self.rows)))

    @property
    def gmacs(self) -> float:
        return self.total_macs / GIGA

    @property
    def is_encoder(self) -> bool:
        return self.downsampling > 1 and self.upsampling == 1

    def to_table(self) -> str:
        header = (
            f"{'layer':<32} {'kind':<9} {'in':>6} {'out':>6} "
            f"{'rate':>10} {'MACs/s':>16} {'RF':>7}"
        )
        lines = [f"# {self.name} @ {float(self.sample_rate):g} Hz", header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row.name:<32} {row.kind:<9} {row.in_channels:>6} {row.out_channels:>6} "
                f"{float(row.rate):>10.2f} {row.macs:>16,.0f} {row.cumulative_rf:>7}"
            )
        lines.append("-" * len(header))
        lines.append(f"total {self.gmacs:.4f} GMACs/s, receptive field {self.receptive_field}")
        lines.append(f"lookahead {self.lookahead}, stateful {str(self.stateful).lower()}")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "sample_rate": float(self.sample_rate),
            "total_macs": self.total_macs,
            "gmacs": self.gmacs,
            "receptive_field": self.receptive_field,
            "lookahead": self.lookahead,
            "stateful": self.stateful,
            "layers": [
                {
                    "name": row.name,
                    "kind": row.kind,
                    "in_channels": row.in_channels,
                    "out_channels": row.out_channels,
                    "rate": float(row.rate),
                    "macs": row.macs,
                    "cumulative_rf": row.cumulative_rf,
                }
                for row in self.rows
            ],
        }


def _check(layer: object) -> None:
    if not isinstance(layer, (Conv1d, TransposedConv1d, Lstm, Elu, Tanh, Residual)):
        raise AnalysisError(f"cannot analyze layer type {type(layer).__name__}")


def _leaves(layers: Sequence[Layer]) -> Iterator[Tuple[Layer, Tuple[Layer, ...]]]:
    """
    Each leaf layer with the top-level prefix ending at it; an enclosing residual is
    truncated to its inner prefix
    """
    for index, layer in enumerate(layers):
        _check(layer)
        if isinstance(layer, Residual):
            for leaf, inner in _leaves(layer.layers):
                yield leaf, tuple(layers[:index]) + (Residual(layer.name, inner),)
        else:
            yield layer, tuple(layers[: index + 1])


def _strides(layers: Sequence[Layer]) -> Tuple[int, int]:
    down, up = 1, 1
    for layer in layers:
        _check(layer)
        if isinstance(layer, Residual):
            inner_down, inner_up = _strides(layer.layers)
            down, up = down * inner_down, up * inner_up
        elif isinstance(layer, Conv1d):
            down *= layer.stride
        elif isinstance(layer, TransposedConv1d):
            up *= layer.stride
    return down, up


def _back(
    layers: Sequence[Layer], lo: np.ndarray, hi: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Input index interval that output indices [lo, hi] depend on
    """
    for layer in reversed(layers):
        _check(layer)
        if isinstance(layer, Conv1d):
            lo = lo * layer.stride - (layer.kernel_size - 1) * layer.dilation
            hi = hi * layer.stride
        elif isinstance(layer, TransposedConv1d):
            lo = -((layer.kernel_size - 1 - lo) // layer.stride)
            hi = hi // layer.stride
        elif isinstance(layer, Residual):
            inner_lo, inner_hi = _back(layer.layers, lo, hi)
            lo, hi = np.minimum(lo, inner_lo), np.maximum(hi, inner_hi)
    return lo, hi


def _span(layers: Sequence[Layer]) -> Tuple[int, int]:
    """
    (receptive field, lookahead) in input samples

    The dependency pattern repeats every `up` output samples, so one period is exhaustive.
    """
    down, up = _strides(layers)
    outputs = np.arange(up, dtype=np.int64)
    lo, hi = _back(layers, outputs.copy(), outputs.copy())
    field_size = int(np.max(hi - lo + 1))
    lookahead = int(np.max(hi - (outputs * down) // up))
    return field_size, max(0, lookahead)


def receptive_field(graph: NetworkGraph) -> int:
    return _span(graph.layers)[0]


def _lstm_macs(layer: Lstm) -> int:
    macs = 0
    for index in range(layer.num_layers):
        inputs = layer.input_size if index == 0 else layer.hidden_size
        macs += 4 * (inputs * layer.hidden_size + layer.hidden_size * layer.hidden_size)
    return macs


def count_macs(graph: NetworkGraph, sample_rate: Union[int, Fraction]) -> BudgetReport:
    """
    Per-layer MACs per second of input at `sample_rate`, with cumulative receptive fields
    """
    rows: List[LayerRow] = []
    channels = graph.in_channels
    for leaf, prefix in _leaves(graph.layers):
        down, up = _strides(prefix)
        rate = Fraction(sample_rate) * up / down
        in_channels = channels
        if isinstance(leaf, Conv1d):
            macs = leaf.in_channels * leaf.out_channels * leaf.kernel_size * rate
            channels = leaf.out_channels
        elif isinstance(leaf, TransposedConv1d):
            macs = leaf.in_channels * leaf.out_channels * leaf.kernel_size * rate / leaf.stride
            channels = leaf.out_channels
        elif isinstance(leaf, Lstm):
            macs = _lstm_macs(leaf) * rate
            channels = leaf.hidden_size
        else:
            macs = Fraction(0)
        rows.append(
            LayerRow(
                leaf.name, leaf.kind, in_channels, channels, rate, float(macs), _span(prefix)[0]
            )
        )

    field_size, lookahead = _span(graph.layers)
    down, up = _strides(graph.layers)
    report = BudgetReport(
        graph.name, sample_rate, tuple(rows), field_size, lookahead, graph.stateful, down, up
    )
    logger.debug(
        "Analyzed graph",
        graph=graph.name,
        gmacs=report.gmacs,
        receptive_field=report.receptive_field,
    )
    return report


@dataclass(frozen=True)
class BudgetVerdict:
    name: str
    gmacs: float
    ceiling: float
    status: str

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def compare_budget(
    reports: Sequence[BudgetReport], ceiling: float = DECODE_BUDGET_GMACS
) -> List[BudgetVerdict]:
    """
    Mark each graph against the decode ceiling; encoders do not run at decode time
    """
    verdicts = []
    for report in reports:
        if report.is_encoder:
            status = "exempt"
        else:
            status = "pass" if report.gmacs <= ceiling else "fail"
        verdicts.append(BudgetVerdict(report.name, report.gmacs, ceiling, status))
    return verdicts


def budget_table(verdicts: Sequence[BudgetVerdict]) -> str:
    lines = [f"{'graph':<24} {'GMACs/s':>10} {'ceiling':>8}  status"]
    for verdict in verdicts:
        lines.append(
            f"{verdict.name:<24} {verdict.gmacs:>10.3f} {verdict.ceiling:>8.1f}  {verdict.status}"
        )
    return "\n".join(lines)


@dataclass(frozen=True)
class SubbandBudget:
    core: Tuple[BudgetReport, ...]
    side: Tuple[BudgetReport, ...]

    @property
    def core_macs(self) -> float:
        return sum(report.total_macs for report in self.core)

    @property
    def side_macs(self) -> float:
        return sum(report.total_macs for report in self.side)

    @property
    def side_ratio(self) -> float:
        return self.side_macs / self.core_macs if self.core_macs else 0.0


def subband_budget(cfg: CodecConfig, layout: Optional[SubbandLayout] = None) -> SubbandBudget:
    """
    Core and side network MACs at the per-band sample rate
    """
    layout = layout or SubbandLayout.from_config(cfg)
    band_rate = Fraction(cfg.sample_rate, layout.num_bands)
    graphs = build_subband_graphs(cfg)

    reports = [tuple(count_macs(graph, band_rate) for graph in pair) for pair in graphs]
    return SubbandBudget(reports[0], tuple(r for pair in reports[1:] for r in pair))


def preset_rows() -> List[Dict[str, object]]:
    rows = []
    for name in PRESETS:
        cfg = preset(name)
        rows.append(
            {
                "preset": name,
                "sample_rate": cfg.sample_rate,
                "total_stride": cfg.total_stride,
                "frame_rate": math.floor(frame_rate_for(cfg)),
                "num_quantizers": cfg.num_quantizers,
                "codebook_size": cfg.codebook_size,
                "bitrate": bitrate_for(cfg),
            }
        )
    return rows


def preset_table() -> str:
    lines = [f"{'preset':<20} {'SR':>6} {'stride':>6} {'FR':>6} {'Nq':>4} {'CB':>6} {'bps':>8}"]
    for row in preset_rows():
        lines.append(
            f"{row['preset']:<20} {row['sample_rate']:>6} {row['total_stride']:>6} "
            f"{row['frame_rate']:>6} {row['num_quantizers']:>4} {row['codebook_size']:>6} "
            f"{row['bitrate']:>8}"
        )
    return "\n".join(lines)
