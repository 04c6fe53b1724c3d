from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bioforge.agent import (AgentConfig, CritiqueReport, DesignState, Entry, NoRuleApplies,
                            RetrievalStore, builtin_generate, critique, default_store,
                            refine, repair, retrieve, run_graph, select_best)
from bioforge.agent import graph as graph_mod
from bioforge.agent.faults import corrupt
from bioforge.agent.store import cosine, term_vector
from bioforge.dsl import parse, parse_intent, schema
from bioforge.dsl.parser import format_program
from bioforge.dsl.program import ParseError
from bioforge.geometry import Scene, box, compile_program
from bioforge.rng import Rng
from bioforge.validate import validate_scene

# -- retrieval -------------------------------------------------------------------


def brute_ranking(store, query, k):
    q = term_vector(query)
    scored = [(cosine(q, term_vector(e.caption)), i) for i, e in enumerate(store.entries)]
    scored.sort(key=lambda s: (-s[0], s[1]))
    return [store.entries[i] for _, i in scored[:k]]


QUERIES = ["voronoi foam with 30 cells", "twisted plywood", "tubules in a slab",
           "a helical structure on a foam", "nothing relevant here", "perforated cortex"]


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("query", QUERIES)
def test_retrieval_matches_brute_force(query, k):
    store = default_store()
    assert len(store) == 12
    assert retrieve(store, query, k) == brute_ranking(store, query, k)


def test_retrieval_k_bounds(caplog):
    store = default_store()
    assert retrieve(store, "foam", 0) == []
    assert len(retrieve(store, "foam", 50)) == 12
    with pytest.raises(ValueError):
        retrieve(store, "foam", -1)


def test_default_k_is_two():
    assert AgentConfig().k == 2


def test_store_roundtrip(tmp_path):
    store = default_store()
    store.save(tmp_path / "s.json")
    again = RetrievalStore.load(tmp_path / "s.json")
    assert again.entries == store.entries
    with pytest.raises(ValueError):
        RetrievalStore([])


@pytest.mark.parametrize("bad", [dict(k=0), dict(max_iterations=0),
                                 dict(evaluation_mode="best"), dict(generator="gpt")])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        AgentConfig(**bad)


# -- critic ------------------------------------------------------------------------

def _critique(prompt, text, context=None):
    scene = compile_program(parse(text))
    return critique(parse_intent(prompt), scene, validate_scene(scene), context or [])


def test_critic_formula():
    text = "design a { helical { plies 6 } }"
    rep = _critique("helical structure with 8 plies", text)
    assert rep.validity == 1.0
    assert rep.intent_match == pytest.approx(1 - 2 / 8)
    assert rep.score == pytest.approx(0.4 + 0.6 * 0.75)
    assert "PARAM_MISMATCH" in rep.codes()


def test_critic_perfect_match():
    rep = _critique("helical structure with 8 plies", "design a { helical { plies 8 } }")
    assert rep.score == 1.0 and rep.issues == []


def test_critic_exec_fail_scores_zero():
    rep = critique(parse_intent("foam"), None, None)
    assert rep.score == 0.0 and rep.codes() == ["EXEC_FAIL"]


def test_critic_class_mismatch():
    rep = _critique("voronoi foam", "design a { helical { } }")
    assert "CLASS_MISMATCH" in rep.codes()
    assert rep.score == pytest.approx(0.4)


def test_critic_floating():
    scene = Scene([box((0, 0, 0), (1, 1, 1)), box((5, 0, 0), (6, 1, 1))],
                  blocks=[{"index": 0, "kind": "primitive", "params": {}}])
    rep = critique(parse_intent("a cube"), scene, validate_scene(scene))
    assert "FLOATING" in rep.codes()
    assert rep.validity == pytest.approx(2 / 3)


def test_critic_executed_scene_never_zero():
    scene = Scene([box((0, 0, 0), (1, 1, 1)), box((5, 0, 0), (6, 1, 1))],
                  blocks=[{"index": 0, "kind": "primitive", "params": {}}])
    report = validate_scene(scene)
    report.watertight_per_mesh = [False, False]
    report.self_intersection_pairs = 3
    rep = critique(parse_intent("voronoi foam"), scene, report)
    assert 0 < rep.score <= 1e-3 + 1e-12


def test_critique_report_roundtrip():
    rep = _critique("helical structure with 8 plies", "design a { helical { plies 6 } }")
    assert CritiqueReport.from_dict(rep.to_dict()) == rep


# -- repair ------------------------------------------------------------------------

def _error(text):
    try:
        parse(text)
    except ParseError as err:
        return err
    raise AssertionError("text parsed")


def test_repair_keyword_typo():
    text = "design a {\n  helicle {\n    plies 8\n  }\n}\n"
    fixed = repair(text, _error(text))
    assert parse(fixed).blocks[0].kind == "helical"


def test_repair_missing_brace():
    text = "design a {\n  helical {\n    plies 8\n  }\n"
    fixed = repair(text, _error(text))
    assert parse(fixed).blocks[0].params["plies"] == 8


def test_repair_out_of_range_clamps():
    text = "design a {\n  helical {\n    plies 0\n  }\n}\n"
    fixed = repair(text, _error(text))
    assert parse(fixed).blocks[0].params["plies"] == schema.param_spec("helical", "plies").lo


def test_repair_compile_overlap():
    text = "design a {\n  tubular {\n    tubule_radius 1\n    spacing 1.5\n  }\n}\n"
    try:
        compile_program(parse(text))
    except Exception as err:
        fixed = repair(text, err)
    compile_program(parse(fixed))


def test_repair_unknown_error():
    with pytest.raises(NoRuleApplies):
        repair("design a { }", RuntimeError("boom"))


def test_corruptions_mostly_recoverable():
    from bioforge.library import bio_library

    ok = total = 0
    for i, design in enumerate(bio_library().designs):
        rng = Rng(500 + i)
        for _ in range(5):
            text, _ = corrupt(design.program_text, rng)
            total += 1
            for _ in range(4):
                try:
                    compile_program(parse(text))
                    ok += 1
                    break
                except Exception as err:
                    try:
                        text = repair(text, err)
                    except NoRuleApplies:
                        break
    assert ok / total >= 0.9


# -- refine ------------------------------------------------------------------------

THIN = "closed cell foam with thin face-sheets"


def test_refine_scales_thin_shell():
    program = parse("design a {\n  cellular {\n    sandwich 0.5\n  }\n}\n")
    rep = CritiqueReport(score=0.5, suggestions=[{"param": "sandwich_thickness",
                                                  "factor": 0.6}])
    out = refine(program, rep)
    assert out.blocks[0].modifier("sandwich").value == pytest.approx(0.3)
    assert program.blocks[0].modifier("sandwich").value == 0.5


def test_refine_param_mismatch_sets_value():
    program = parse("design a { helical { plies 6 } }")
    rep = CritiqueReport(score=0.5, issues=[{"code": "PARAM_MISMATCH", "name": "plies",
                                            "want": 9, "got": 6, "kind": "helical"}])
    assert refine(program, rep).blocks[0].params["plies"] == 9


def test_refine_clamps():
    program = parse("design a { helical { plies 6 } }")
    rep = CritiqueReport(score=0.5, suggestions=[{"param": "plies", "factor": 1000}])
    spec = schema.param_spec("helical", "plies")
    assert refine(program, rep).blocks[0].params["plies"] == spec.hi


def test_thin_shell_refinement_monotone():
    intent = parse_intent(THIN)
    text = "design a {\n  cellular {\n    region_count 12\n    sandwich 2\n  }\n}\n"
    program = parse(text)
    thickness, scores = [], []
    for _ in range(5):
        scene = compile_program(program)
        rep = critique(intent, scene, validate_scene(scene))
        thickness.append(program.blocks[0].modifier("sandwich").value)
        scores.append(rep.score)
        program = refine(program, rep, intent)
    for a, b in zip(thickness, thickness[1:]):
        assert (b < a) if a > 0.5 else (b == a)
    assert thickness[-1] <= 0.5 and scores[-1] == 1.0
    assert all(b >= a for a, b in zip(scores, scores[1:]))


# -- generation ------------------------------------------------------------------

def test_builtin_empty_context_uses_defaults():
    program = parse(builtin_generate("helical structure with 9 plies", []))
    block = program.blocks[0]
    assert block.params["plies"] == 9
    for name, value in schema.defaults("helical").items():
        if name != "plies":
            assert block.params[name] == value


def test_builtin_underspecified_follows_context():
    context = retrieve(default_store(), "voronoi foam", 2)
    assert parse(builtin_generate("make something nice", context)).kinds == ["cellular"]


def test_builtin_deterministic():
    ctx = retrieve(default_store(), "tubular slab", 2)
    assert builtin_generate("tubular slab", ctx, 3) == builtin_generate("tubular slab", ctx, 3)


# -- graph -------------------------------------------------------------------------

def test_base_caption_accepted_first_pass():
    from bioforge.library import bio_library

    design = bio_library().designs[0]
    state = run_graph(design.caption)
    assert state.terminal == "Accepted" and state.iteration == 0
    assert len(state.history) == 1


def test_unreachable_threshold_hits_cap():
    state = run_graph("voronoi foam with 20 cells", AgentConfig(accept_threshold=1.01))
    assert state.terminal == "MaxIters"
    assert len(state.history) == 5
    assert [h["action"] for h in state.history] == ["generate"] + ["refine"] * 4


def test_single_pass_stops_after_one_evaluation():
    state = run_graph("voronoi foam", AgentConfig(accept_threshold=1.01), single_pass=True)
    assert len(state.history) == 1 and state.terminal == "MaxIters"


def test_fault_injection_routes_through_repair():
    good = "design a {\n  helical {\n    plies 8\n  }\n}\n"
    bad = good.replace("helical", "helicle")
    state = run_graph("helical structure with 8 plies", generator=lambda p, c: bad)
    assert state.history[0]["score"] == 0.0
    assert state.history[1]["action"] == "repair"
    assert state.terminal == "Accepted"


def test_no_rule_is_unrecoverable(monkeypatch):
    def refuse(text, err):
        raise NoRuleApplies("X")

    monkeypatch.setattr(graph_mod, "repair", refuse)
    state = run_graph("foam", generator=lambda p, c: "design {")
    assert state.terminal == "Unrecoverable"
    assert len(state.history) == 1 and state.warnings


def test_persistent_failure_is_unrecoverable():
    # two independent faults need two repairs; the cap allows one
    state = run_graph("foam", AgentConfig(max_iterations=1),
                      generator=lambda p, c: "design a { helicle { plies 8 } ")
    assert [h["score"] for h in state.history] == [0.0, 0.0]
    assert state.terminal == "Unrecoverable"


def test_run_directory_layout(tmp_path):
    state = run_graph("voronoi foam with 8 cells", out_dir=tmp_path, run_id="r1")
    run = tmp_path / "run_r1"
    for name in ("program.bgs", "report.json", "critique.json", "render_iso.ppm"):
        assert (run / "iter_0" / name).exists()
    final = json.loads((run / "final.json").read_text())
    assert final["terminal"] == state.terminal
    assert final["critic"] == "geometric"
    assert state.history[0]["render_paths"]


def test_no_artifacts_without_out_dir():
    state = run_graph("voronoi foam with 8 cells")
    assert state.history[0]["render_paths"] == []


def test_select_best_modes():
    state = DesignState("p", parse_intent("p"))
    state.history = [{"iteration": i, "score": s} for i, s in enumerate([0.5, 0.8, 0.6])]
    assert select_best(state, "any_step")["iteration"] == 1
    assert select_best(state, "final_render")["iteration"] == 2
    state.history.append({"iteration": 3, "score": 0.8})
    assert select_best(state)["iteration"] == 1
    with pytest.raises(ValueError):
        select_best(DesignState("p", parse_intent("p")))


def test_run_is_deterministic():
    a = run_graph("tubular slab with 9 tubules", AgentConfig(accept_threshold=1.01))
    b = run_graph("tubular slab with 9 tubules", AgentConfig(accept_threshold=1.01))
    assert [h["program_text"] for h in a.history] == [h["program_text"] for h in b.history]


@settings(max_examples=30)
@given(st.lists(st.floats(0, 1), min_size=5, max_size=5), st.integers(1, 4),
       st.floats(0, 1.2))
def test_graph_invariants_with_adversarial_critic(scores, cap, threshold):
    feed = iter(scores)

    def critic(state):
        return CritiqueReport(score=next(feed))

    cfg = AgentConfig(max_iterations=cap, accept_threshold=threshold)
    state = run_graph("voronoi foam", cfg, critic=critic)
    n = len(state.history)
    assert 1 <= n <= cap + 1
    assert [h["iteration"] for h in state.history] == list(range(n))
    assert state.terminal in ("Accepted", "MaxIters")
    if state.terminal == "Accepted":
        assert state.history[-1]["score"] >= threshold
    else:
        assert n == cap + 1
    assert all(h["score"] < threshold for h in state.history[:-1])
    assert select_best(state, "any_step")["score"] >= select_best(state, "final_render")["score"]
    assert select_best(state)["score"] == max(h["score"] for h in state.history)
