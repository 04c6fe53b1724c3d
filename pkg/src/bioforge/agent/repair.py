"""Rule-based program repair: one edit per call, keyed on the error code."""

from __future__ import annotations

from ..dsl import schema
from ..dsl.parser import MAX_U64, edit_distance, format_number, format_program, parse, tokenize
from ..dsl.program import DesignProgram, ParseError
from ..geometry.mesh import GeometryError

MAX_KEYWORD_DISTANCE = 2
FALLBACK_PROGRAM = "design repaired {\n  primitive {\n  }\n}\n"


class NoRuleApplies(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"no repair rule for {code}: {message}")
        self.code = code


def _splice(text: str, start: int, end: int, new: str) -> str:
    return text[:start] + new + text[end:]


def _tokens(text: str) -> list:
    try:
        return tokenize(text)
    except ParseError:
        return []


def _token_index(tokens: list, offset: int) -> int | None:
    for i, t in enumerate(tokens):
        if t.start == offset and t.type != "eof":
            return i
    return None


def _next_token(tokens: list, offset: int):
    for t in tokens:
        if t.start >= offset:
            return t
    return None


def _after(tokens: list, tok):
    if tok is None:
        return None
    j = tokens.index(tok)
    return tokens[j + 1] if j + 1 < len(tokens) else None


def _delete_token(text: str, tok) -> str:
    start, end = tok.start, tok.end
    # swallow one run of trailing spaces so lines stay tidy
    while end < len(text) and text[end] == " ":
        end += 1
    return _splice(text, start, end, "")


def _nearest(word: str, candidates: list[str]) -> str | None:
    best = None
    for cand in candidates:
        d = edit_distance(word, cand)
        if d <= MAX_KEYWORD_DISTANCE and (best is None or d < best[0]):
            best = (d, cand)
    return best[1] if best else None


def _block_statement_words(tokens: list, open_idx: int) -> list[str]:
    """Identifier words directly inside the brace pair opening at ``open_idx``."""
    words, depth = [], 0
    for t in tokens[open_idx:]:
        if t.type == "lbrace":
            depth += 1
        elif t.type == "rbrace":
            depth -= 1
            if depth == 0:
                break
        elif t.type == "ident" and depth == 1:
            words.append(t.text)
    return words


def _best_kind(words: list[str]) -> str | None:
    scores = []
    for kind in schema.KINDS:
        n = sum(1 for w in words
                if schema.canonical_param(kind, w) or w in schema.ALLOWED_MODIFIERS[kind])
        scores.append((n, kind))
    n, kind = max(scores, key=lambda s: s[0])
    return kind if n > 0 else None


def _kind_token(tokens: list, scope_offset: int):
    i = _token_index(tokens, scope_offset)
    if i is None or i == 0:
        return None, None
    return tokens[i - 1], i


def repair_parse(text: str, err: ParseError) -> str:
    code = err.error_code
    ctx = err.context
    tokens = _tokens(text)
    tok = ctx.get("token")

    if code == "Empty":
        return FALLBACK_PROGRAM

    if code == "UnknownKeyword":
        word = tok.text
        nearest = _nearest(word, list(ctx.get("candidates", [])))
        i = _token_index(tokens, tok.start)
        nxt = tokens[i + 1] if i is not None and i + 1 < len(tokens) else None
        if ctx.get("context_kind") == "design":
            # a parameter stranded after an early '}' means that brace is spurious
            prev = tokens[i - 1] if i else None
            if (prev is not None and prev.type == "rbrace" and nxt is not None
                    and nxt.type == "number" and any(schema.canonical_param(k, word)
                                                     for k in schema.KINDS)):
                return _delete_token(text, prev)
            if nxt is not None and nxt.type == "lbrace":
                kind = nearest or _best_kind(_block_statement_words(tokens, i + 1))
                if kind:
                    return _splice(text, tok.start, tok.end, kind)
        if nearest:
            return _splice(text, tok.start, tok.end, nearest)
        if "kind" in ctx and ctx.get("scopes"):
            # statements of another kind: relabel the block when that explains more of it
            kind_tok, open_i = _kind_token(tokens, ctx["scopes"][-1][0])
            if kind_tok is not None:
                words = _block_statement_words(tokens, open_i)
                kind = _best_kind(words)
                if kind and kind != ctx["kind"]:
                    mine = sum(1 for w in words if schema.canonical_param(ctx["kind"], w))
                    theirs = sum(1 for w in words if schema.canonical_param(kind, w))
                    if theirs > mine:
                        return _splice(text, kind_tok.start, kind_tok.end, kind)
        if nxt is not None and nxt.type == "number":
            end = nxt.end
            while end < len(text) and text[end] == " ":
                end += 1
            return _splice(text, tok.start, end, "")
        return _delete_token(text, tok)

    if code == "UnbalancedBrace":
        if ctx.get("extra"):
            return _delete_token(text, tok)
        at = ctx.get("at_offset", len(text))
        if at >= len(text):
            sep = "" if text.endswith("\n") or not text else "\n"
            return text + sep + "}\n"
        return _splice(text, at, at, "} ")

    if code == "ValueOutOfRange":
        if ctx.get("param") == "seed":
            value = max(0, min(MAX_U64, int(float(tok.text))))
            return _splice(text, tok.start, tok.end, str(value))
        if "modifier" in ctx:
            value = schema.clamp_modifier(ctx["modifier"], float(tok.text))
        else:
            value = schema.param_spec(ctx["kind"], ctx["param"]).clamp(float(tok.text))
        return _splice(text, tok.start, tok.end, format_number(value))

    if code == "UnexpectedToken":
        if "duplicate" in ctx:
            i = _token_index(tokens, tok.start)
            nxt = tokens[i + 1] if i is not None and i + 1 < len(tokens) else None
            if nxt is not None and nxt.type == "number":
                return _splice(text, tok.start, nxt.end, "")
            return _delete_token(text, tok)
        expected = ctx.get("expected")
        insert_at = ctx.get("insert_offset")
        following = _next_token(tokens, insert_at) if insert_at is not None else None
        if expected == "number":
            # junk sitting where the value belongs: drop it when a number follows
            if following is not None and following.type not in ("number", "eof") and not (
                    following.type == "ident" and "kind" in ctx
                    and (schema.canonical_param(ctx["kind"], following.text)
                         or following.text in schema.ALLOWED_MODIFIERS[ctx["kind"]])):
                j = tokens.index(following)
                after = tokens[j + 1] if j + 1 < len(tokens) else None
                if after is not None and after.type == "number":
                    return _delete_token(text, following)
            if ctx.get("param") == "seed":
                value = 0
            elif "modifier" in ctx:
                value = schema.MODIFIER_DEFAULTS.get(ctx["modifier"], 1.0)
            else:
                value = schema.param_spec(ctx["kind"], ctx["param"]).default
            return _splice(text, insert_at, insert_at, " " + format_number(value))
        after = _after(tokens, following)
        if expected == "lbrace":
            if after is not None and after.type == "lbrace":
                return _delete_token(text, following)
            if following is not None and following.type in ("string", "number", "rbrace"):
                return _splice(text, following.start, following.end, "{")
            return _splice(text, insert_at, insert_at, " {")
        if expected == "design":
            if after is not None and after.type == "ident" and after.text == "design":
                return _delete_token(text, following)
            return _splice(text, insert_at, insert_at, "design ")
        if expected == "name":
            if (following is not None and following.type not in ("ident", "string")
                    and after is not None and after.type in ("ident", "string")):
                return _delete_token(text, following)
            if following is not None and following.type not in ("lbrace", "eof"):
                return _splice(text, following.start, following.end, "repaired")
            return _splice(text, insert_at, insert_at, " repaired")
        if expected == "axis":
            if following is not None and following.type == "ident" and \
                    following.text not in schema.AXES:
                return _splice(text, following.start, following.end, "x")
            return _splice(text, insert_at, insert_at, " x")
        if expected == "block":
            if tok.type == "lbrace":
                i = _token_index(tokens, tok.start)
                kind = _best_kind(_block_statement_words(tokens, i)) if i is not None else None
                return _splice(text, tok.start, tok.start, (kind or "primitive") + " ")
            if tok.type == "rbrace":
                return _splice(text, tok.start, tok.start, "primitive { } ")
            return _delete_token(text, tok)
        if tok is not None and tok.type != "eof":
            if tok.end <= len(text) and tok.start < tok.end:
                return _delete_token(text, tok)
        offset = ctx.get("offset")
        if offset is not None and offset < len(text):
            # stray character or unterminated string reported by the tokenizer
            return _splice(text, offset, offset + 1, "")
    raise NoRuleApplies(code, err.message)


def repair_compile(program: DesignProgram, err: GeometryError) -> str:
    from ..geometry.generators import fit_tubular_block

    index = err.context.get("block_index")
    if index is None or not 0 <= index < len(program.blocks):
        raise NoRuleApplies(err.code, err.message)
    program = program.copy()
    block = program.blocks[index]
    if err.code in ("TubuleOverlap", "TubuleOutsideCortex"):
        fit_tubular_block(block, fixed_count=False)
    elif err.code == "HoleOverlap" and "needed" in err.context:
        spec = schema.param_spec(block.kind, "hole_radius")
        block.params["hole_radius"] = spec.clamp(round(0.8 * err.context["needed"], 6))
    elif err.code == "ValueOutOfRange" and err.context.get("param") == "sides":
        block.params["sides"] = 0
    else:
        raise NoRuleApplies(err.code, err.message)
    return format_program(program)


def repair(program_text: str, error) -> str:
    """Apply one rule-table edit for ``error`` and return the edited text."""
    if isinstance(error, ParseError):
        return repair_parse(program_text, error)
    if isinstance(error, GeometryError):
        return repair_compile(parse(program_text), error)
    raise NoRuleApplies(type(error).__name__, str(error))
