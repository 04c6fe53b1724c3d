"""Geometric critic: scores a compiled design against the prompt intent."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..dsl.intent import COMPOSITE, IntentSpec

VALIDITY_WEIGHT = 0.4
INTENT_WEIGHT = 0.6
# sandwich face thickness considered "thin"
THIN_TARGET = 0.5
THIN_STEP = 0.6
# an executed scene never scores exactly zero; zero is reserved for EXEC_FAIL
MIN_EXECUTED_SCORE = 1e-3

# which block kind owns each numeric intent parameter
PARAM_KIND = {
    "plies": "helical", "rotation_deg": "helical", "fibers_per_ply": "helical",
    "region_count": "cellular", "smooth_levels": "cellular",
    "tubule_count": "tubular",
    "hole_count": "slab",
    "sides": "primitive", "count_x": "primitive", "count_y": "primitive",
}


@dataclass
class CritiqueReport:
    score: float
    issues: list[dict] = field(default_factory=list)
    suggestions: list[dict] = field(default_factory=list)
    validity: float = 0.0
    intent_match: float = 0.0
    critic: str = "geometric"

    def codes(self) -> list[str]:
        return [i["code"] for i in self.issues]

    def has(self, code: str) -> bool:
        return any(i["code"] == code for i in self.issues)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "CritiqueReport":
        return cls(**doc)


def exec_fail(error: dict | None = None) -> CritiqueReport:
    issue = {"code": "EXEC_FAIL"}
    if error:
        issue["error"] = error
    return CritiqueReport(score=0.0, issues=[issue])


def measure(scene) -> dict:
    """Per-kind parameter readings from construction metadata and mesh counts."""
    out: dict[str, dict] = {}
    for info in scene.blocks:
        kind = info["kind"]
        if kind in out:
            continue
        p = dict(info["params"])
        meshes = [m for m in scene.meshes if m.meta.get("block_index") == info["index"]]
        if kind == "helical":
            p["plies"] = sum(1 for m in meshes if "ply" in m.meta)
        elif kind == "cellular":
            p["region_count"] = sum(1 for m in meshes if "cell" in m.meta)
        elif kind == "tubular":
            p["tubule_count"] = sum(m.meta.get("tubule_count", 0) for m in meshes)
        elif kind == "slab":
            p["hole_count"] = sum(m.meta.get("holes", 0) for m in meshes)
        out[kind] = p
    return out


def _relative_error(want: float, got: float) -> float:
    return min(1.0, abs(want - got) / max(abs(want), 1.0))


def reference_intent(intent: IntentSpec, context: list) -> tuple[IntentSpec, bool]:
    """Intent used for scoring; the top retrieved design stands in when underspecified."""
    if not intent.underspecified or not context:
        return intent, False
    desc = context[0].descriptor or {}
    classes = list(desc.get("classes", []))
    return IntentSpec(target_class=classes[0] if len(classes) == 1 else COMPOSITE,
                      classes=classes, numeric_params={}, motif_flags=set(intent.motif_flags),
                      free_terms=list(intent.free_terms)), True


def critique(intent: IntentSpec, scene, report, context: list | None = None) -> CritiqueReport:
    """score = 0.4 * validity + 0.6 * intent_match."""
    if scene is None or report is None or not report.executed or report.mesh_count < 1:
        return exec_fail(report.error if report is not None else None)
    issues: list[dict] = []
    suggestions: list[dict] = []

    checks = [report.watertight, not report.unintended_floating,
              report.self_intersection_pairs == 0]
    if not checks[0]:
        issues.append({"code": "NOT_WATERTIGHT"})
    if not checks[1]:
        issues.append({"code": "FLOATING", "components": list(report.unintended_floating)})
        suggestions += [{"param": "offset_x", "factor": 0.0}, {"param": "offset_y", "factor": 0.0}]
    if not checks[2]:
        issues.append({"code": "SELF_INTERSECT", "pairs": report.self_intersection_pairs})
        suggestions.append({"param": "spacing", "factor": 1.25})
    validity = sum(checks) / len(checks)

    ref, underspecified = reference_intent(intent, context or [])
    if underspecified or intent.underspecified:
        issues.append({"code": "UNDERSPECIFIED"})
    measured = measure(scene)
    present = list(measured)

    wanted = list(ref.classes)
    if wanted:
        hit = [c for c in wanted if c in present]
        class_term = len(hit) / len(wanted)
        for c in wanted:
            if c not in present:
                issues.append({"code": "CLASS_MISMATCH", "want": c, "got": present})
    else:
        class_term = 1.0

    match = class_term
    for name, want in sorted(ref.numeric_params.items()):
        kind = PARAM_KIND.get(name)
        if kind is None or kind not in measured or name not in measured[kind]:
            continue
        got = measured[kind][name]
        err = _relative_error(float(want), float(got))
        if err > 0:
            issues.append({"code": "PARAM_MISMATCH", "name": name, "want": want, "got": got,
                           "kind": kind})
        match *= 1.0 - err

    flags = ref.motif_flags
    if "gradient" in flags and "tubular" in measured:
        grad = measured["tubular"].get("gradient")
        if not grad or grad[1] == 1.0:
            issues.append({"code": "PARAM_MISMATCH", "name": "gradient", "want": 1.5,
                           "got": None, "kind": "tubular"})
            match *= 0.5
    if "irregular" in flags and "helical" in measured:
        if measured["helical"].get("noise_deg", 0.0) <= 0:
            issues.append({"code": "PARAM_MISMATCH", "name": "noise_deg", "want": 5.0,
                           "got": 0.0, "kind": "helical"})
            match *= 0.75
    if "cellular" in measured:
        sandwich = measured["cellular"].get("sandwich_thickness", 0.0)
        if ({"sandwich", "thin"} & flags) and sandwich <= 0:
            issues.append({"code": "PARAM_MISMATCH", "name": "sandwich_thickness",
                           "want": 1.0, "got": 0.0, "kind": "cellular"})
            match *= 0.5
        if "thin" in flags and sandwich > THIN_TARGET:
            err = min(1.0, (sandwich - THIN_TARGET) / THIN_TARGET)
            suggestions.append({"param": "sandwich_thickness", "factor": THIN_STEP})
            match *= 1.0 - err

    score = VALIDITY_WEIGHT * validity + INTENT_WEIGHT * match
    return CritiqueReport(score=min(1.0, max(MIN_EXECUTED_SCORE, score)), issues=issues,
                          suggestions=suggestions, validity=validity, intent_match=match)


def evaluate(state, store=None) -> CritiqueReport:
    """Critique the scene held by a design state.

    Retrieved context already on the state is reused; otherwise the store is
    queried when the intent alone is too vague to score against.
    """
    context = list(getattr(state, "context", None) or [])
    if not context and store is not None and state.intent.underspecified:
        from .store import retrieve

        context = retrieve(store, state.prompt, 1)
    return critique(state.intent, state.scene, state.report, context)
