"""BGS design language: parsing, canonical printing and prompt intent."""

from .intent import (
    COMPOSITE,
    IntentSpec,
    WordBanks,
    default_banks,
    parse_intent,
    program_from_intent,
)
from .parser import format_program, parse, tokenize
from .program import Block, DesignProgram, Modifier, ParseError

format = format_program  # noqa: A001

__all__ = [
    "COMPOSITE", "Block", "DesignProgram", "IntentSpec", "Modifier", "ParseError", "WordBanks",
    "default_banks", "format", "format_program", "parse", "parse_intent", "program_from_intent",
    "tokenize",
]
