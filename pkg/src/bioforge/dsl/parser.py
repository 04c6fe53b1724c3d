"""Tokenizer, recursive-descent parser and canonical printer for BGS."""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import schema
from .program import Block, DesignProgram, Modifier, ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<lbrace>\{)
  | (?P<rbrace>\})
    """,
    re.VERBOSE,
)
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
MAX_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class Token:
    type: str  # ident | number | string | lbrace | rbrace | eof
    text: str
    line: int
    col: int
    start: int
    end: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            ch = source[pos]
            if ch == '"':
                raise ParseError("unterminated string", line, col, "UnexpectedToken", offset=pos)
            raise ParseError(f"unexpected character {ch!r}", line, col, "UnexpectedToken",
                             offset=pos, text=ch)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col, pos, m.end()))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos, pos))
    return tokens


def edit_distance(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0
        # (token, kind) of open braces, innermost last
        self.scopes: list[tuple[Token, str]] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message, tok, code, **context):
        if tok.type == "eof" and code != "Empty":
            # keep positions inside the source
            last = self.tokens[self.i - 1] if self.i > 0 else tok
            tok = last
        context.setdefault("offset", tok.start)
        context.setdefault("token", tok)
        context["scopes"] = [(t.start, k) for t, k in self.scopes]
        return ParseError(message, tok.line, tok.col, code, **context)

    def unbalanced(self, message, **context):
        opener, scope_kind = self.scopes[-1]
        context.setdefault("scope_kind", scope_kind)
        return self.error(message, opener, "UnbalancedBrace", at_offset=self.tok.start, **context)

    def expect_lbrace(self, after: Token, scope_kind: str) -> None:
        if self.tok.type != "lbrace":
            raise self.error(f"expected '{{' after {after.text!r}", after, "UnexpectedToken",
                             expected="lbrace", insert_offset=after.end)
        self.scopes.append((self.advance(), scope_kind))

    def parse(self) -> DesignProgram:
        if self.tok.type == "eof":
            raise ParseError("empty program", 1, 1, "Empty", offset=0)
        head = self.tok
        if head.type != "ident" or head.text != "design":
            if head.type == "ident" and edit_distance(head.text, "design") <= 2:
                raise self.error(f"unknown keyword {head.text!r}", head, "UnknownKeyword",
                                 candidates=["design"])
            raise self.error("expected 'design'", head, "UnexpectedToken", expected="design",
                             insert_offset=head.start)
        self.advance()
        name_tok = self.tok
        if name_tok.type == "ident":
            name = name_tok.text
        elif name_tok.type == "string":
            name = name_tok.text[1:-1]
        else:
            raise self.error("expected design name after 'design'", head, "UnexpectedToken",
                             expected="name", insert_offset=head.end)
        self.advance()
        self.expect_lbrace(name_tok, "design")

        seed = 0
        if self.tok.type == "ident" and self.tok.text == "seed":
            seed_tok = self.advance()
            value = self.tok
            if value.type != "number":
                raise self.error("expected a value after 'seed'", seed_tok, "UnexpectedToken",
                                 expected="number", param="seed", insert_offset=seed_tok.end)
            self.advance()
            seed = self.number_value(value, int)
            if seed is None or not 0 <= seed <= MAX_U64:
                raise self.error("seed must be an unsigned 64-bit integer", value,
                                 "ValueOutOfRange", param="seed", bounds=(0, MAX_U64))

        blocks: list[Block] = []
        while True:
            t = self.tok
            if t.type == "rbrace":
                if not blocks:
                    raise self.error("a design needs at least one block", t, "UnexpectedToken",
                                     expected="block")
                self.advance()
                self.scopes.pop()
                break
            if t.type == "eof":
                raise self.unbalanced("missing '}' closing the design")
            if t.type == "ident" and t.text in schema.KINDS:
                blocks.append(self.parse_block(len(blocks)))
                continue
            if t.type == "ident":
                raise self.error(f"unknown keyword {t.text!r}", t, "UnknownKeyword",
                                 candidates=list(schema.KINDS), context_kind="design")
            raise self.error(f"unexpected {t.text!r}, expected a block", t, "UnexpectedToken",
                             expected="block")

        t = self.tok
        if t.type == "rbrace":
            raise self.error("unmatched '}'", t, "UnbalancedBrace", extra=True)
        if t.type != "eof":
            raise self.error(f"unexpected {t.text!r} after the design", t, "UnexpectedToken")
        return DesignProgram(name=name, seed=seed, blocks=blocks)

    def number_value(self, tok: Token, typ: type):
        text = tok.text
        if typ is int:
            if re.fullmatch(r"[+-]?\d+", text):
                return int(text)
            v = float(text)
            return int(v) if v.is_integer() and abs(v) < 2**63 else None
        return float(text)

    def parse_block(self, index: int) -> Block:
        kind_tok = self.advance()
        kind = kind_tok.text
        self.expect_lbrace(kind_tok, kind)
        block = Block(kind)
        block.spans["__kind__"] = (kind_tok.line, kind_tok.col)
        seen_mods: set[str] = set()
        while True:
            t = self.tok
            if t.type == "rbrace":
                self.advance()
                self.scopes.pop()
                return block
            if t.type == "eof":
                raise self.unbalanced(f"missing '}}' closing the {kind} block", block_index=index)
            if t.type == "ident" and t.text in schema.KINDS:
                raise self.unbalanced(f"missing '}}' before {t.text!r}", block_index=index)
            if t.type != "ident":
                raise self.error(f"unexpected {t.text!r} in {kind} block", t, "UnexpectedToken",
                                 expected="statement", block_index=index, kind=kind)
            word = t.text
            canon = schema.canonical_param(kind, word)
            if canon is not None:
                self.advance()
                spec = schema.param_spec(kind, canon)
                if canon in block.params:
                    raise self.error(f"duplicate parameter {canon!r}", t, "UnexpectedToken",
                                     duplicate=canon, block_index=index, kind=kind)
                value_tok = self.tok
                if value_tok.type != "number":
                    raise self.error(f"expected a value after {word!r}", t, "UnexpectedToken",
                                     expected="number", param=canon, kind=kind,
                                     block_index=index, insert_offset=t.end)
                self.advance()
                value = self.number_value(value_tok, spec.type)
                if value is None or not spec.contains(value):
                    raise self.error(
                        f"{canon} = {value_tok.text} outside {spec.lo}..{spec.hi}",
                        value_tok, "ValueOutOfRange", param=canon, kind=kind,
                        block_index=index, value=float(value_tok.text),
                    )
                block.params[canon] = value
                block.spans[canon] = (t.line, t.col)
                continue
            if word in schema.ALLOWED_MODIFIERS[kind]:
                self.advance()
                if word in seen_mods:
                    raise self.error(f"duplicate modifier {word!r}", t, "UnexpectedToken",
                                     duplicate=word, block_index=index, kind=kind)
                seen_mods.add(word)
                axis = None
                if word == "gradient":
                    axis_tok = self.tok
                    if axis_tok.type != "ident" or axis_tok.text not in schema.AXES:
                        raise self.error("expected axis x|y|z after 'gradient'", t,
                                         "UnexpectedToken", expected="axis", modifier=word,
                                         block_index=index, insert_offset=t.end)
                    axis = self.advance().text
                value_tok = self.tok
                if value_tok.type != "number":
                    anchor = self.tokens[self.i - 1]
                    raise self.error(f"expected a value for {word!r}", t, "UnexpectedToken",
                                     expected="number", modifier=word, kind=kind,
                                     block_index=index, insert_offset=anchor.end)
                self.advance()
                typ = schema.MODIFIER_RANGES[word][0]
                value = self.number_value(value_tok, typ)
                if value is None or not schema.modifier_in_range(word, value):
                    raise self.error(f"{word} value {value_tok.text} out of range", value_tok,
                                     "ValueOutOfRange", modifier=word, kind=kind,
                                     block_index=index, value=float(value_tok.text))
                block.modifiers.append(Modifier(word, value, axis))
                block.spans["@" + word] = (t.line, t.col)
                continue
            raise self.error(f"unknown keyword {word!r} in {kind} block", t, "UnknownKeyword",
                             candidates=schema.block_keywords(kind), kind=kind,
                             block_index=index)


def parse(source: str) -> DesignProgram:
    """Parse BGS text; raises :class:`ParseError` at the earliest problem."""
    return _Parser(source).parse()


def format_number(value) -> str:
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def format_program(program: DesignProgram) -> str:
    name = program.name if _IDENT_RE.match(program.name) else f'"{program.name}"'
    lines = [f"design {name} {{", f"  seed {program.seed}"]
    for block in program.blocks:
        lines.append(f"  {block.kind} {{")
        for key in schema.param_order(block.kind):
            if key in block.params:
                lines.append(f"    {key} {format_number(block.params[key])}")
        for mod in block.modifiers:
            axis = f" {mod.axis}" if mod.axis else ""
            lines.append(f"    {mod.kind}{axis} {format_number(mod.value)}")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


format = format_program  # noqa: A001 - public name mirrors the operation
