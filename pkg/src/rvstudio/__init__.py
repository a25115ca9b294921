"""Integrated RV32IM assembler and simulator with real-time incremental
assembly, a CPU simulator, format explainers, and a benchmark harness."""

__version__ = "0.1.0"

from .assembler import assemble_full
from .incremental import (
    DeleteRange,
    Document,
    InsertChar,
    InsertNewline,
    Paste,
    apply_edit,
    classify_edit,
)
from .model import AssemblyState, MachineImage

__all__ = [
    "__version__",
    "assemble_full",
    "apply_edit",
    "classify_edit",
    "Document",
    "InsertChar",
    "InsertNewline",
    "DeleteRange",
    "Paste",
    "AssemblyState",
    "MachineImage",
]
