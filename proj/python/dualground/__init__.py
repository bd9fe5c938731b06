# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The dualground Authors
"""Python bindings for the dualground toolkit."""

import json

from ._dualground import (
    ChainParseError,
    FastChain,
    FirstTokenDist,
    Mode,
    ModeDecision,
    NormBBox,
    NormPoint,
    SlowChain,
    center,
    gen_scenes,
    hit,
    parse_chain,
    render_chain,
    run_cli,
    select_mode,
)
from ._dualground import _evaluate_mock


def evaluate_mock(scenes_path, samples_path, alpha=0.6, seed=0, parallelism=1):
    """Evaluates a sample file against the mock backend; returns the report dict."""
    return json.loads(_evaluate_mock(str(scenes_path), str(samples_path), alpha, seed, parallelism))


__all__ = [
    "ChainParseError",
    "FastChain",
    "FirstTokenDist",
    "Mode",
    "ModeDecision",
    "NormBBox",
    "NormPoint",
    "SlowChain",
    "center",
    "evaluate_mock",
    "gen_scenes",
    "hit",
    "parse_chain",
    "render_chain",
    "run_cli",
    "select_mode",
]
