from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bioforge.bench import (DIFFICULTIES, BenchmarkSuite, BenchResult, BenchRow, aggregate,
                            build_suite, load_suite, run_benchmark, summarize)
from bioforge.dsl import parse_intent


@pytest.fixture(scope="module")
def suite():
    return load_suite()


@pytest.fixture(scope="module")
def mini(suite):
    picked = [p for d in DIFFICULTIES for p in suite.subset(d).prompts[:3]]
    return BenchmarkSuite(picked, "mini")


def test_shipped_suite_shape(suite):
    assert len(suite) == 320
    assert [len(suite.subset(d)) for d in DIFFICULTIES] == [60, 80, 180]
    assert len({p.id for p in suite.prompts}) == 320
    assert len({p.text for p in suite.prompts}) == 320
    assert all(p.text.startswith("Write a BGS script to make a ") for p in suite.prompts)


def test_shipped_suite_is_reproducible(suite):
    assert build_suite().to_dict() == suite.to_dict()


def test_annotations_agree_with_parser(suite):
    for p in suite.prompts:
        intent = parse_intent(p.text)
        assert intent.classes == p.classes
        assert intent.numeric_params == p.expected.get("params", {})


def test_suite_roundtrip(tmp_path, suite):
    suite.save(tmp_path / "s.json")
    assert load_suite(tmp_path / "s.json").to_dict() == suite.to_dict()


def test_suite_rejects_duplicates(suite):
    with pytest.raises(ValueError):
        BenchmarkSuite([suite.prompts[0], suite.prompts[0]])


def test_unparsable_runner_scores_zero(mini):
    result = run_benchmark(mini, lambda prompt, context: "this is not a program")
    agg = result.aggregates
    assert agg["execution_rate"] == 0.0 and agg["mean_score"] == 0.0
    assert all(r.iterations == 1 for r in result.rows)


def test_crashing_runner_is_isolated(mini):
    def runner(prompt, context):
        raise RuntimeError("boom")

    result = run_benchmark(mini, runner)
    assert len(result.rows) == len(mini)
    assert all(r.terminal.startswith("error") and r.score == 0.0 for r in result.rows)


def test_builtin_mini(mini, tmp_path):
    result = run_benchmark(mini, "builtin", out_dir=tmp_path, bench_id="b")
    assert result.aggregates["execution_rate"] == 1.0
    assert all(r.iterations == 1 for r in result.rows)
    base = tmp_path / "bench_b"
    for name in ("results.json", "results.txt", "difficulty.png", "iterations.png"):
        assert (base / name).exists()
    assert (base / mini.prompts[0].id / "final.json").exists()
    doc = json.loads((base / "results.json").read_text())
    again = BenchResult.from_dict(doc)
    assert again.aggregates == doc["aggregates"]


def test_builtin_deterministic(mini):
    a = run_benchmark(mini, "builtin")
    b = run_benchmark(mini, "builtin")
    assert a.to_json() == b.to_json()


def test_prompt_isolation(mini):
    full = run_benchmark(mini, "builtin")
    fewer = BenchmarkSuite(mini.prompts[1:], "fewer")
    part = run_benchmark(fewer, "builtin")
    assert [r.__dict__ for r in full.rows[1:]] == [r.__dict__ for r in part.rows]


def test_summarize_text(mini):
    text, doc = summarize(run_benchmark(mini, "builtin"))
    assert "overall" in text and doc["runner"] == "builtin"


def test_unknown_runner(mini):
    with pytest.raises(ValueError):
        run_benchmark(mini, "gpt")


rows = st.lists(st.builds(BenchRow, id=st.text(min_size=1, max_size=4),
                          difficulty=st.sampled_from(DIFFICULTIES), executed=st.booleans(),
                          score=st.floats(0, 1), iterations=st.integers(1, 5),
                          selected_iteration=st.integers(0, 4), mode=st.just("any_step"),
                          terminal=st.just("Accepted")), min_size=1, max_size=40)


@given(rows)
def test_weighted_means_identity(sample):
    agg = aggregate(sample)
    parts = agg["per_difficulty"]
    weighted = sum(parts[d]["n"] * parts[d]["mean_score"] for d in DIFFICULTIES) / agg["n"]
    assert abs(weighted - agg["mean_score"]) <= 1e-12
    assert sum(agg["iteration_histogram"].values()) == agg["n"]


@given(rows)
def test_aggregates_recomputable_from_json(sample):
    result = BenchResult("builtin", "any_step", sample)
    again = BenchResult.from_dict(json.loads(result.to_json()))
    assert again.aggregates == result.aggregates
