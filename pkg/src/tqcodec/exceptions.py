#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
"""

from typing import Optional

__all__ = [
    "TQCodecError",
    "ConfigError",
    "ContractError",
    "WavFormatError",
    "WavParseError",
    "EmptySpectrogramError",
    "FilterDesignError",
    "GraphValidationError",
    "WeightResolutionError",
    "WeightValidationError",
    "WeightParseError",
    "StreamProtocolError",
    "QuantizerValidationError",
    "CodebookRangeError",
    "FittingError",
    "ConditioningError",
    "QuantizerStateError",
    "BitstreamRangeError",
    "BitstreamParseError",
    "MetricError",
    "UndefinedReferenceError",
    "AnalysisError",
]


class TQCodecError(Exception):
    pass


class ConfigError(TQCodecError):
    pass


class ContractError(TQCodecError):
    pass


class WavFormatError(TQCodecError):
    pass


class WavParseError(TQCodecError):
    pass


class EmptySpectrogramError(TQCodecError):
    pass


class FilterDesignError(TQCodecError):
    pass


class GraphValidationError(ContractError):
    pass


class WeightResolutionError(TQCodecError):
    pass


class WeightValidationError(TQCodecError):
    pass


class WeightParseError(TQCodecError):
    pass


class StreamProtocolError(TQCodecError):
    pass


class QuantizerValidationError(TQCodecError):
    pass


class CodebookRangeError(TQCodecError):
    pass


class FittingError(TQCodecError):
    pass


class ConditioningError(FittingError):
    pass


class QuantizerStateError(TQCodecError):
    pass


class BitstreamRangeError(TQCodecError):
    pass


class BitstreamParseError(TQCodecError):
    def __init__(self, message: str, offset: Optional[int] = None) -> None:
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class MetricError(TQCodecError):
    pass


class UndefinedReferenceError(MetricError):
    pass


class AnalysisError(TQCodecError):
    pass
