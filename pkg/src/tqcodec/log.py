#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Parent structured logger; modules attach with Logger(service=SERVICE_NAME, child=True).
"""

import logging
import os
import sys

from aws_lambda_powertools import Logger

from .constants import SERVICE_NAME

__all__ = ["logger", "set_quiet"]

# stdout is reserved for command output
logger = Logger(
    service=SERVICE_NAME,
    level=os.getenv("LOG_LEVEL", "INFO"),
    logger_handler=logging.StreamHandler(sys.stderr),
)


def set_quiet(quiet: bool) -> None:
    logger.setLevel("WARNING" if quiet else os.getenv("LOG_LEVEL", "INFO"))
