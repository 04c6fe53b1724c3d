"""Agentic generate / critique / repair / refine loop."""

from .critic import CritiqueReport, critique, evaluate
from .generate import builtin_generate, generate
from .graph import AgentConfig, DesignState, execute, run_graph, select_best
from .refine import refine
from .repair import NoRuleApplies, repair
from .store import Entry, RetrievalStore, default_store, retrieve

__all__ = [
    "AgentConfig", "CritiqueReport", "DesignState", "Entry", "NoRuleApplies",
    "RetrievalStore", "builtin_generate", "critique", "default_store", "evaluate", "execute",
    "generate", "refine", "repair", "retrieve", "run_graph", "select_best",
]
