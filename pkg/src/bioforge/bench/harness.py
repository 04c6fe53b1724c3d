"""Run a prompt suite through a generator and aggregate critic scores."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from ..agent.critic import critique
from ..agent.graph import AgentConfig, DesignState, run_graph, select_best
from ..agent.store import RetrievalStore, default_store
from ..rng import stable_hash
from .suite import DIFFICULTIES, BenchmarkSuite, BenchPrompt

RUNNERS = ("builtin", "agent", "remote")


@dataclass
class BenchRow:
    id: str
    difficulty: str
    executed: bool
    score: float
    iterations: int
    selected_iteration: int
    mode: str
    terminal: str


@dataclass
class BenchResult:
    runner: str
    mode: str
    rows: list[BenchRow] = field(default_factory=list)

    @property
    def aggregates(self) -> dict:
        return aggregate(self.rows)

    def to_dict(self) -> dict:
        return {"runner": self.runner, "mode": self.mode,
                "rows": [asdict(r) for r in self.rows], "aggregates": self.aggregates}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchResult":
        return cls(doc["runner"], doc["mode"], [BenchRow(**r) for r in doc["rows"]])


def aggregate(rows: list[BenchRow]) -> dict:
    def block(sel: list[BenchRow]) -> dict:
        n = len(sel)
        return {
            "n": n,
            "execution_rate": sum(r.executed for r in sel) / n if n else 0.0,
            "mean_score": float(np.mean([r.score for r in sel])) if n else 0.0,
        }

    hist: dict[str, int] = {}
    for r in rows:
        hist[str(r.iterations)] = hist.get(str(r.iterations), 0) + 1
    return {
        **block(rows),
        "per_difficulty": {d: block([r for r in rows if r.difficulty == d])
                           for d in DIFFICULTIES},
        "iteration_histogram": dict(sorted(hist.items(), key=lambda kv: int(kv[0]))),
    }


def prompt_seed(prompt_id: str) -> int:
    return stable_hash(prompt_id)


def _scoring_critic(prompt: BenchPrompt) -> Callable[[DesignState], object]:
    intent = prompt.intent()

    def critic(state: DesignState):
        return critique(intent, state.scene, state.report, state.context)

    return critic


def run_prompt(prompt: BenchPrompt, runner, cfg: AgentConfig, store: RetrievalStore,
               run_dir=None) -> BenchRow:
    """One prompt, isolated: its own seed, state and artifact directory."""
    pcfg = replace(cfg, seed=prompt_seed(prompt.id))
    generator = None
    if callable(runner):
        generator = runner
    elif runner in ("builtin", "remote"):
        pcfg = replace(pcfg, generator=runner)
    elif runner != "agent":
        raise ValueError(f"runner must be one of {RUNNERS} or a callable")
    try:
        state = run_graph(prompt.text, pcfg, store, run_dir=run_dir, generator=generator,
                          critic=_scoring_critic(prompt), single_pass=runner != "agent")
    except Exception as err:  # a broken prompt never aborts the run
        return BenchRow(prompt.id, prompt.difficulty, False, 0.0, 0, -1, cfg.evaluation_mode,
                        f"error: {type(err).__name__}")
    best = select_best(state, cfg.evaluation_mode)
    return BenchRow(prompt.id, prompt.difficulty, bool(best["report"]["executed"]),
                    float(best["score"]), len(state.history), int(best["iteration"]),
                    cfg.evaluation_mode, state.terminal)


def run_benchmark(suite: BenchmarkSuite, runner="builtin", cfg: AgentConfig | None = None,
                  store: RetrievalStore | None = None, out_dir=None,
                  bench_id: str | None = None) -> BenchResult:
    """Score every prompt of ``suite``; rows keep suite order.

    ``runner`` is "builtin" (single pass), "agent" (full loop), "remote"
    (single pass through the adapter) or a callable ``(prompt, context) -> text``.
    """
    cfg = cfg or AgentConfig()
    store = store or default_store()
    name = runner if isinstance(runner, str) else "custom"
    base = None
    if out_dir is not None:
        base = Path(out_dir) / f"bench_{bench_id or name}"
        base.mkdir(parents=True, exist_ok=True)
    result = BenchResult(name, cfg.evaluation_mode)
    for prompt in suite.prompts:
        run_dir = base / prompt.id if base is not None else None
        result.rows.append(run_prompt(prompt, runner, cfg, store, run_dir))
    if base is not None:
        write_report(result, base)
    return result


def summarize(result: BenchResult) -> tuple[str, dict]:
    """Plain-text table and the JSON document it was printed from."""
    agg = result.aggregates
    lines = [f"runner: {result.runner}   mode: {result.mode}",
             f"{'subset':<8} {'n':>5} {'exec rate':>10} {'mean score':>11}"]
    for d in DIFFICULTIES:
        b = agg["per_difficulty"][d]
        lines.append(f"{d:<8} {b['n']:>5} {b['execution_rate']:>10.3f} {b['mean_score']:>11.3f}")
    lines.append(f"{'overall':<8} {agg['n']:>5} {agg['execution_rate']:>10.3f} "
                 f"{agg['mean_score']:>11.3f}")
    lines.append("iterations: " + "  ".join(f"{k}:{v}"
                                            for k, v in agg["iteration_histogram"].items()))
    return "\n".join(lines) + "\n", result.to_dict()


def write_report(result: BenchResult, out: Path) -> dict:
    from ..plotting import bar_chart

    text, _ = summarize(result)
    agg = result.aggregates
    paths = {"json": out / "results.json", "table": out / "results.txt",
             "difficulty_figure": out / "difficulty.png",
             "iterations_figure": out / "iterations.png"}
    paths["json"].write_text(result.to_json(), encoding="utf-8")
    paths["table"].write_text(text, encoding="utf-8")
    bar_chart(paths["difficulty_figure"], [*DIFFICULTIES, "overall"],
              [agg["per_difficulty"][d]["mean_score"] for d in DIFFICULTIES] + [agg["mean_score"]],
              f"Mean score ({result.runner}, {result.mode})", "score", ylim=(0, 1))
    hist = agg["iteration_histogram"]
    bar_chart(paths["iterations_figure"], list(hist), [float(v) for v in hist.values()],
              "History length per prompt", "prompts")
    return {k: str(v) for k, v in paths.items()}
