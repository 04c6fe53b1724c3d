"""Generate -> compile/validate -> render -> evaluate loop with repair and refinement."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

from ..dsl import parse, parse_intent
from ..dsl.intent import IntentSpec
from ..dsl.parser import format_program
from ..dsl.program import DesignProgram, ParseError
from ..geometry import compile_program
from ..geometry.mesh import GeometryError
from ..remote import AdapterConfig
from ..rng import stable_hash
from ..validate import ValidationReport, render_scene, validate_scene
from .critic import CritiqueReport, critique, exec_fail
from .generate import generate
from .refine import refine
from .repair import NoRuleApplies, repair
from .store import RetrievalStore, default_store, retrieve

log = logging.getLogger(__name__)

RUNNING, ACCEPTED, MAX_ITERS, UNRECOVERABLE = "Running", "Accepted", "MaxIters", "Unrecoverable"
MODES = ("any_step", "final_render")


@dataclass(frozen=True)
class AgentConfig:
    k: int = 2
    max_iterations: int = 4
    accept_threshold: float = 0.7
    evaluation_mode: str = "any_step"
    generator: str = "builtin"
    adapter: AdapterConfig = field(default_factory=AdapterConfig)
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.evaluation_mode not in MODES:
            raise ValueError(f"evaluation_mode must be one of {MODES}")
        if self.generator not in ("builtin", "remote"):
            raise ValueError("generator must be 'builtin' or 'remote'")


@dataclass
class DesignState:
    prompt: str
    intent: IntentSpec
    program: DesignProgram | None = None
    program_text: str | None = None
    scene: object | None = None
    report: ValidationReport | None = None
    critique: CritiqueReport | None = None
    iteration: int = 0
    history: list[dict] = field(default_factory=list)
    terminal: str = RUNNING
    context: list = field(default_factory=list)
    error: Exception | None = None
    warnings: list[str] = field(default_factory=list)

    def summary(self) -> dict:
        best = select_best(self, "any_step") if self.history else None
        return {
            "prompt": self.prompt,
            "intent": self.intent.to_dict(),
            "terminal": self.terminal,
            "iterations": self.iteration,
            "history": [dict(h) for h in self.history],
            "best_iteration": best["iteration"] if best else None,
            "best_score": best["score"] if best else None,
            "final_score": self.history[-1]["score"] if self.history else None,
            "warnings": list(self.warnings),
            "critic": "geometric",
        }


@dataclass(frozen=True)
class Execution:
    program: DesignProgram | None
    scene: object | None
    report: ValidationReport
    error: Exception | None


@lru_cache(maxsize=512)
def execute(program_text: str) -> Execution:
    """Parse, compile and validate; failures become a non-executed report."""
    try:
        program = parse(program_text)
    except ParseError as err:
        return Execution(None, None, ValidationReport.failed(
            {"code": err.error_code, "message": err.message, "line": err.line,
             "column": err.column}), err)
    try:
        scene = compile_program(program)
    except GeometryError as err:
        return Execution(program, None, ValidationReport.failed(err.to_dict()), err)
    return Execution(program, scene, validate_scene(scene), None)


def select_best(state: DesignState, mode: str = "any_step") -> dict:
    """any_step: highest score, earliest on ties; final_render: last entry."""
    if not state.history:
        raise ValueError("history is empty")
    if mode in ("final", "final_render"):
        return state.history[-1]
    if mode != "any_step":
        raise ValueError(f"unknown mode {mode!r}")
    best = state.history[0]
    for entry in state.history[1:]:
        if entry["score"] > best["score"]:
            best = entry
    return best


def _persist(run_dir: Path, state: DesignState, entry: dict) -> None:
    it_dir = run_dir / f"iter_{entry['iteration']}"
    it_dir.mkdir(parents=True, exist_ok=True)
    (it_dir / "program.bgs").write_text(entry["program_text"], encoding="utf-8")
    (it_dir / "report.json").write_text(json.dumps(entry["report"], indent=2, sort_keys=True))
    (it_dir / "critique.json").write_text(json.dumps(entry["critique"], indent=2,
                                                     sort_keys=True))
    if state.scene is not None:
        path = it_dir / "render_iso.ppm"
        render_scene(state.scene, "iso").save(path)
        entry["render_paths"] = [str(path)]


def run_graph(prompt: str, cfg: AgentConfig | None = None, store: RetrievalStore | None = None,
              *, out_dir=None, run_id: str | None = None, run_dir=None,
              single_pass: bool = False,
              generator: Callable[[str, list], str] | None = None,
              critic: Callable[[DesignState], CritiqueReport] | None = None) -> DesignState:
    """Run the agent graph until acceptance, the iteration cap, or an unrecoverable error.

    ``single_pass`` stops after the first evaluation (no repair/refine).  ``generator``
    replaces the first-draft generator (e.g. to inject faults); ``critic``
    replaces the geometric critic for executed scenes.  Artifacts go to
    ``run_dir`` when given, else to ``out_dir/run_<id>``.
    """
    cfg = cfg or AgentConfig()
    store = store or default_store()
    state = DesignState(prompt=prompt, intent=parse_intent(prompt))
    state.context = retrieve(store, prompt, cfg.k)
    if generator is not None:
        text = generator(prompt, state.context)
    else:
        text = generate(prompt, state.context, cfg, cfg.seed, state.warnings)
    if run_dir is None and out_dir is not None:
        run_dir = Path(out_dir) / f"run_{run_id or format(stable_hash(prompt), '016x')[:12]}"
    if run_dir is not None:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)

    action = "generate"
    while True:
        ex = execute(text)
        state.program_text = text
        state.program, state.scene, state.report, state.error = (
            ex.program, ex.scene, ex.report, ex.error)
        if ex.error is not None:
            state.critique = exec_fail(ex.report.error)
        elif critic is not None:
            state.critique = critic(state)
        else:
            state.critique = critique(state.intent, ex.scene, ex.report, state.context)
        entry = {
            "iteration": state.iteration,
            "action": action,
            "program_text": text,
            "render_paths": [],
            "report": ex.report.to_dict(),
            "critique": state.critique.to_dict(),
            "score": state.critique.score,
        }
        if run_dir is not None:
            _persist(run_dir, state, entry)
        state.history.append(entry)

        failed = state.critique.has("EXEC_FAIL")
        if not failed and state.critique.score >= cfg.accept_threshold:
            state.terminal = ACCEPTED
            break
        if single_pass or state.iteration >= cfg.max_iterations:
            state.terminal = UNRECOVERABLE if failed else MAX_ITERS
            break
        if failed:
            try:
                text = repair(text, ex.error)
            except NoRuleApplies as err:
                state.warnings.append(str(err))
                state.terminal = UNRECOVERABLE
                break
            action = "repair"
        else:
            text = format_program(refine(ex.program, state.critique, state.intent))
            action = "refine"
        state.iteration += 1

    if run_dir is not None:
        (run_dir / "final.json").write_text(json.dumps(state.summary(), indent=2,
                                                       sort_keys=True) + "\n")
    return state
