"""Benchmark suite and harness."""

from .harness import (RUNNERS, BenchResult, BenchRow, aggregate, prompt_seed, run_benchmark,
                      run_prompt, summarize, write_report)
from .suite import DIFFICULTIES, BenchmarkSuite, BenchPrompt, build_suite, load_suite

__all__ = [
    "DIFFICULTIES", "RUNNERS", "BenchPrompt", "BenchResult", "BenchRow", "BenchmarkSuite",
    "aggregate", "build_suite", "load_suite", "prompt_seed", "run_benchmark", "run_prompt",
    "summarize", "write_report",
]
