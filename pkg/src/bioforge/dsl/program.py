from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Modifier:
    kind: str
    value: float
    axis: str | None = None


@dataclass
class Block:
    kind: str
    params: dict = field(default_factory=dict)
    modifiers: list[Modifier] = field(default_factory=list)
    # source positions of statements, (line, col) keyed by canonical name
    spans: dict = field(default_factory=dict, compare=False, repr=False)

    def modifier(self, kind: str) -> Modifier | None:
        """Last declared modifier of ``kind`` (later declarations win)."""
        found = None
        for m in self.modifiers:
            if m.kind == kind:
                found = m
        return found


@dataclass
class DesignProgram:
    name: str
    seed: int = 0
    blocks: list[Block] = field(default_factory=list)

    @property
    def kinds(self) -> list[str]:
        return [b.kind for b in self.blocks]

    def copy(self) -> "DesignProgram":
        return DesignProgram(
            self.name,
            self.seed,
            [Block(b.kind, dict(b.params), list(b.modifiers)) for b in self.blocks],
        )


class ParseError(Exception):
    """Syntax or range error with a stable machine-readable code."""

    CODES = ("UnknownKeyword", "UnexpectedToken", "UnbalancedBrace", "ValueOutOfRange", "Empty")

    def __init__(self, message: str, line: int, column: int, error_code: str, **context):
        assert error_code in self.CODES, error_code
        super().__init__(f"{line}:{column}: {error_code}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.error_code = error_code
        self.context = context

    def to_dict(self) -> dict:
        return {
            "message": self.message,
            "line": self.line,
            "column": self.column,
            "error_code": self.error_code,
        }
