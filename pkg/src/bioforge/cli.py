"""Command-line entry point: compile, render, validate, agent, dataset and bench."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .dsl import parse
from .dsl.parser import format_program
from .dsl.program import ParseError
from .geometry import GeometryError, compile_program
from .remote import AdapterConfig

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
DEFAULT_OUT = "bioforge_out"

log = logging.getLogger("bioforge")


class UsageError(Exception):
    pass


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bioforge", description=__doc__)
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    c = sub.add_parser("compile", help="compile a design; write STL, report and canonical text")
    c.add_argument("file")
    c.add_argument("--out", default=DEFAULT_OUT)

    r = sub.add_parser("render", help="render a design to a PPM image")
    r.add_argument("file")
    r.add_argument("--view", default="iso", choices=["iso", "front", "top"])
    r.add_argument("--out", default=DEFAULT_OUT)

    v = sub.add_parser("validate", help="print the validation report of a design")
    v.add_argument("file")

    a = sub.add_parser("agent", help="run the generate/critique/repair/refine loop")
    a.add_argument("--prompt", required=True)
    a.add_argument("--k", type=_pos_int)
    a.add_argument("--max-iters", type=_pos_int)
    a.add_argument("--threshold", type=_nonneg_float)
    a.add_argument("--mode", choices=["any_step", "final", "final_render"])
    a.add_argument("--runner", choices=["builtin", "remote"])
    a.add_argument("--seed", type=_nonneg_int)
    a.add_argument("--config")
    a.add_argument("--out", default=DEFAULT_OUT)

    d = sub.add_parser("dataset", help="build the instruction/response dataset")
    d.add_argument("--config")
    d.add_argument("--seed", type=_nonneg_int)
    d.add_argument("--out", default=DEFAULT_OUT)

    b = sub.add_parser("bench", help="run the benchmark suite")
    b.add_argument("--suite", help="suite JSON (default: the shipped 320-prompt suite)")
    b.add_argument("--runner", default="builtin", choices=["builtin", "agent", "remote"])
    b.add_argument("--k", type=_pos_int)
    b.add_argument("--max-iters", type=_pos_int)
    b.add_argument("--threshold", type=_nonneg_float)
    b.add_argument("--mode", choices=["any_step", "final", "final_render"])
    b.add_argument("--difficulty", choices=["easy", "medium", "hard"])
    b.add_argument("--limit", type=_pos_int)
    b.add_argument("--config")
    b.add_argument("--out", default=DEFAULT_OUT)
    return p


# -- configuration -----------------------------------------------------------

def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise UsageError(f"cannot read config {path}: {err}") from err
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    return doc


def _section(doc: dict, name: str, cls) -> dict:
    """Fields of ``cls`` from ``doc[name]`` or, failing that, from the top level."""
    src = doc.get(name, doc)
    names = {f.name for f in dataclasses.fields(cls)}
    return {k: v for k, v in src.items() if k in names}


def agent_config(args, doc: dict):
    from .agent.graph import AgentConfig

    fields = _section(doc, "agent", AgentConfig)
    fields.pop("adapter", None)
    adapter = AdapterConfig(**_section(doc, "adapter", AdapterConfig))
    overrides = {"k": args.k, "max_iterations": args.max_iters,
                 "accept_threshold": args.threshold,
                 "generator": getattr(args, "runner", None) if args.command == "agent" else None,
                 "seed": getattr(args, "seed", None)}
    if args.mode is not None:
        overrides["evaluation_mode"] = "final_render" if args.mode == "final" else args.mode
    fields.update({k: v for k, v in overrides.items() if v is not None})
    if fields.get("evaluation_mode") == "final":
        fields["evaluation_mode"] = "final_render"
    try:
        return AgentConfig(adapter=adapter, **fields)
    except (TypeError, ValueError) as err:
        raise UsageError(str(err)) from err


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _out(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands -------------------------------------------------------------

def cmd_compile(args) -> int:
    from .validate import ValidationReport, export_stl, validate_scene

    out = _out(args.out)
    try:
        program = parse(_read(args.file))
        scene = compile_program(program)
    except (ParseError, GeometryError) as err:
        report = ValidationReport.failed(_error_dict(err))
        (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    report = validate_scene(scene)
    (out / "program.bgs").write_text(format_program(program), encoding="utf-8")
    size = export_stl(scene, out / "scene.stl")
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    print(f"{program.name}: {report.mesh_count} meshes, {scene.triangle_count} triangles, "
          f"STL {size} bytes -> {out}")
    return EXIT_OK


def _error_dict(err) -> dict:
    if isinstance(err, ParseError):
        return {"code": err.error_code, "message": err.message, "line": err.line,
                "column": err.column}
    return err.to_dict()


def cmd_render(args) -> int:
    from .validate import render_scene

    out = _out(args.out)
    try:
        scene = compile_program(parse(_read(args.file)))
        image = render_scene(scene, args.view)
    except (ParseError, GeometryError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    path = image.save(out / f"render_{args.view}.ppm")
    print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import ValidationReport, validate_scene

    try:
        report = validate_scene(compile_program(parse(_read(args.file))))
    except (ParseError, GeometryError) as err:
        report = ValidationReport.failed(_error_dict(err))
    print(report.to_json())
    ok = (report.executed and report.watertight and not report.unintended_floating
          and report.self_intersection_pairs == 0)
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_agent(args) -> int:
    from .agent.graph import UNRECOVERABLE, run_graph, select_best

    cfg = agent_config(args, load_config(args.config))
    out = _out(args.out)
    state = run_graph(args.prompt, cfg, out_dir=out)
    best = select_best(state, cfg.evaluation_mode)
    for entry in state.history:
        print(f"iter {entry['iteration']}  {entry['action']:<8}  score {entry['score']:.3f}")
    print(f"terminal: {state.terminal}   selected: iter {best['iteration']} "
          f"({cfg.evaluation_mode}) score {best['score']:.3f}   critic=geometric")
    for w in state.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_DOMAIN if state.terminal == UNRECOVERABLE else EXIT_OK


def cmd_dataset(args) -> int:
    from .dataset import PipelineConfig, build_dataset, stats_table

    doc = load_config(args.config)
    fields = _section(doc, "pipeline", PipelineConfig)
    if args.seed is not None:
        fields["seed"] = args.seed
    try:
        cfg = PipelineConfig(**fields)
    except (TypeError, ValueError) as err:
        raise UsageError(str(err)) from err
    result = build_dataset(cfg, out_dir=_out(args.out))
    sys.stdout.write(stats_table(result.stats))
    print(f"dataset: {result.paths['dataset']}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import BenchmarkSuite, load_suite, run_benchmark, summarize

    cfg = agent_config(args, load_config(args.config))
    try:
        suite = load_suite(args.suite)
    except (OSError, ValueError, KeyError, TypeError) as err:
        print(f"error: cannot load suite: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.difficulty:
        suite = suite.subset(args.difficulty)
    if args.limit:
        suite = BenchmarkSuite(suite.prompts[:args.limit], suite.name)
    if args.runner == "remote":
        cfg = dataclasses.replace(cfg, generator="remote")
    result = run_benchmark(suite, args.runner, cfg, out_dir=_out(args.out))
    text, _ = summarize(result)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"compile": cmd_compile, "render": cmd_render, "validate": cmd_validate,
            "agent": cmd_agent, "dataset": cmd_dataset, "bench": cmd_bench}


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"bioforge: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN


def main(argv: list[str] | None = None) -> int:
    return run_cli(argv)
