#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* High-bitrate subband neural music codec: inference, analysis and measurement.
"""

__version__ = "0.1.0"
