"""Single-token corruptions used to exercise the repair path."""

from __future__ import annotations

from ..dsl import schema
from ..dsl.parser import tokenize
from ..rng import Rng

OPERATIONS = ("delete", "replace", "duplicate", "insert", "typo")
_JUNK = ("{", "}", "7", "-3", "42.5", "foo", "x", '"s"', "plies", "helical", "smooth")
_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _typo(word: str, rng: Rng) -> str:
    i = rng.randint(0, len(word) - 1)
    op = rng.randint(0, 2)
    if op == 0 and len(word) > 1:
        return word[:i] + word[i + 1:]
    if op == 1:
        return word[:i] + rng.choice(_LETTERS) + word[i + 1:]
    j = min(i + 1, len(word) - 1)
    chars = list(word)
    chars[i], chars[j] = chars[j], chars[i]
    out = "".join(chars)
    return out if out != word else word + rng.choice(_LETTERS)


def _replacement(tok, rng: Rng) -> str:
    if tok.type == "number":
        return rng.choice(("0", "-5", "1000", "3.7", "12"))
    if tok.type == "ident":
        pool = list(schema.KINDS) + list(schema.MODIFIERS) + ["seed", "design"]
        for kind in schema.KINDS:
            pool += schema.param_order(kind)
        return rng.choice(pool)
    return rng.choice(_JUNK)


def corrupt(text: str, rng: Rng) -> tuple[str, str]:
    """Apply one random token-level corruption; returns (new_text, operation)."""
    tokens = [t for t in tokenize(text) if t.type != "eof"]
    tok = rng.choice(tokens)
    op = rng.choice(OPERATIONS)
    if op == "typo" and tok.type != "ident":
        op = "replace"
    if op == "delete":
        new = ""
    elif op == "replace":
        new = _replacement(tok, rng)
    elif op == "duplicate":
        new = f"{tok.text} {tok.text}"
    elif op == "insert":
        new = f"{rng.choice(_JUNK)} {tok.text}"
    else:
        new = _typo(tok.text, rng)
    return text[:tok.start] + new + text[tok.end:], op
