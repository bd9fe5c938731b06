# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The dualground Authors

import pytest

import dualground as dg


def test_hit_is_inclusive():
    box = dg.NormBBox(0.2, 0.2, 0.4, 0.4)
    assert dg.hit(dg.NormPoint(0.2, 0.4), box)
    assert not dg.hit(dg.NormPoint(0.41, 0.3), box)


def test_chain_roundtrip():
    text = "<|grounding_start|>(0.46,0.78)<|grounding_end|>"
    chain = dg.parse_chain(text)
    assert isinstance(chain, dg.FastChain)
    assert chain.point == dg.NormPoint(0.46, 0.78)
    assert dg.render_chain(chain) == text
    slow = dg.SlowChain("layout", None, dg.NormPoint(0.5, 0.5))
    assert dg.parse_chain(dg.render_chain(slow)) == slow


def test_parse_error_is_value_error():
    with pytest.raises(ValueError):
        dg.parse_chain("<|grounding_start|>(0.46,0.78)")


def test_select_mode():
    d = dg.select_mode(dg.FirstTokenDist(0.30, 0.50, 0.20), alpha=0.6)
    assert d.mode == dg.Mode.FAST
    assert d.p_slow_adj == pytest.approx(0.18)
    assert d.p_fast_adj == pytest.approx(0.20)


def test_invalid_point():
    with pytest.raises(ValueError):
        dg.NormPoint(1.5, 0.0)


def test_mock_eval(tmp_path):
    scenes = tmp_path / "scenes.jsonl"
    samples = tmp_path / "samples.jsonl"
    assert dg.gen_scenes(str(scenes), str(samples), n=40, seed=2) == 40
    report = dg.evaluate_mock(scenes, samples, alpha=0.6, seed=2)
    assert report["samples"] == 40
    assert 0.0 <= report["average"] <= 1.0
    assert report["mode_counts"]["fast"] + report["mode_counts"]["slow"] == report["scored"]


def test_cli_in_process():
    code, out, _ = dg.run_cli(["chain", "parse", "<|grounding_start|>(0.46,0.78)<|grounding_end|>"])
    assert code == 0
    assert out.startswith("FastChain")
    code, _, _ = dg.run_cli(["eval", "--dataset", "x", "--alpha", "1.5"])
    assert code == 64
