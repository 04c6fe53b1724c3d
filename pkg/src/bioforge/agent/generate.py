"""Prompt to program text: the builtin deterministic generator and the remote path."""

from __future__ import annotations

import logging
from dataclasses import replace

from ..dsl import parse, parse_intent, program_from_intent
from ..dsl.intent import IntentSpec
from ..dsl.parser import format_program
from ..dsl.program import ParseError
from .store import Entry

log = logging.getLogger(__name__)


def bases_from_context(context: list[Entry]) -> dict:
    """Most similar retrieved block per kind (context is ranked best first)."""
    bases: dict = {}
    for entry in context:
        try:
            program = parse(entry.program_text)
        except ParseError:
            continue
        for block in program.blocks:
            bases.setdefault(block.kind, block)
    return bases


def builtin_generate(prompt: str, context: list[Entry], seed: int = 0,
                     intent: IntentSpec | None = None) -> str:
    intent = intent or parse_intent(prompt)
    if intent.underspecified and context:
        # fall back on the classes of the closest reference design
        try:
            kinds = parse(context[0].program_text).kinds
        except ParseError:
            kinds = []
        intent = replace(intent, classes=list(dict.fromkeys(kinds)))
    program = program_from_intent(intent, seed=seed, bases=bases_from_context(context))
    return format_program(program)


def generate(prompt: str, context: list[Entry], cfg, seed: int = 0,
             warnings: list | None = None) -> str:
    """Program text for ``prompt``; remote failures degrade to the builtin path."""
    if not prompt or not prompt.strip():
        raise ValueError("prompt must be nonempty")
    if getattr(cfg, "generator", "builtin") == "remote":
        from ..remote import AdapterError, call_remote_generator, extract_script

        texts = [f"{e.caption}\n{e.program_text}" for e in context]
        try:
            return extract_script(call_remote_generator(prompt, texts, cfg.adapter))
        except AdapterError as err:
            msg = f"RemoteFallback: {err}"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
    return builtin_generate(prompt, context, seed)
