"""Instruction/response dataset generation from the base design library."""

from .instructions import Instruction, generate_instruction, sample_instruction
from .pipeline import (
    DEFAULT_COMPOSITION, RECORD_KINDS, DatasetRecord, DatasetResult, PipelineConfig, allocate,
    build_dataset, load_records, replay, stats_table,
)
from .reasoning import embed_reasoning, recover_program, strip_reasoning
from .variants import DEFAULT_JITTER, diversify, is_valid, restructure

__all__ = [
    "DEFAULT_COMPOSITION", "DEFAULT_JITTER", "DatasetRecord", "DatasetResult", "Instruction",
    "PipelineConfig", "RECORD_KINDS", "allocate", "build_dataset", "diversify",
    "embed_reasoning", "generate_instruction", "is_valid", "load_records", "recover_program",
    "replay", "restructure", "sample_instruction", "stats_table", "strip_reasoning",
]
