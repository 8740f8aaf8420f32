"""Context-aware next-module recommendation for security playbook construction."""

from .model import (
    EOP_MODULE,
    START_MODULE,
    AlertPlaybookMapping,
    AlertRule,
    ModuleRegistry,
    Playbook,
    SchemaKeyRegistry,
    UnifiedGraph,
    build_unified_graph,
    validate_corpus,
)

__all__ = [
    "AlertPlaybookMapping",
    "AlertRule",
    "EOP_MODULE",
    "ModuleRegistry",
    "Playbook",
    "SchemaKeyRegistry",
    "START_MODULE",
    "UnifiedGraph",
    "build_unified_graph",
    "validate_corpus",
]

__version__ = "0.1.0"
