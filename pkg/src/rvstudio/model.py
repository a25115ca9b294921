"""Shared assembly state: line table, symbol table, machine image.

Both assembler modes operate on this model.  The line table holds one entry
per source line in order; the symbol table is a deliberately unsorted list
scanned linearly (the measured complexity depends on it staying that way).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .isa import split_immediate
from .parsing import Diagnostic, LineKind, WORD_KINDS

TEXT_BASE = 0x0000_0000
DATA_BASE = 0x1000_0000
STACK_TOP = 0x8000_0000
STACK_BASE = 0x7000_0000
STACK_INIT = 0x7FFF_FFF0
PLACEHOLDER_WORD = 0x00000000


class LineOutOfRange(IndexError):
    pass


@dataclass(slots=True)
class LineEntry:
    """One line-table row; mirrors the per-line instruction record."""

    source_line_number: int
    source_line: str                  # capped at SOURCE_LINE_MAX by the parser
    kind: LineKind
    error: bool = False
    error_message: str | None = None
    address: int | None = None
    length: int = 0
    mnemonic: str | None = None
    format: str | None = None
    instruction: int | None = None
    opcode: int | None = None
    funct7: int | None = None
    funct3: int | None = None
    rs1: int | None = None
    rs2: int | None = None
    rd: int | None = None
    imm_full: int | None = None
    imm_hi: int | None = None
    imm_lo: int | None = None
    ref_label: str | None = None      # label this instruction references
    ref_span: tuple[int, int] | None = None
    abs_target: bool = False          # pc-relative encode of a fixed address
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def bears_word(self) -> bool:
        return self.kind in WORD_KINDS

    def set_word(self, word: int | None) -> None:
        """Record the encoded word (or clear for a placeholder)."""
        self.instruction = word
        if word is None:
            self.opcode = self.funct7 = self.funct3 = None
            self.rs1 = self.rs2 = self.rd = None
            self.imm_hi = self.imm_lo = None
            return
        self.opcode = word & 0x7F
        self.funct3 = (word >> 12) & 0x7
        self.funct7 = (word >> 25) & 0x7F
        self.rd = (word >> 7) & 0x1F
        self.rs1 = (word >> 15) & 0x1F
        self.rs2 = (word >> 20) & 0x1F
        self.imm_hi, self.imm_lo = split_immediate(self.format, word)


@dataclass(slots=True)
class Reference:
    line_number: int
    address: int


@dataclass(slots=True)
class SymbolEntry:
    label: str
    declaration_line: int | None = None
    address: int | None = None
    references: list[Reference] = field(default_factory=list)


@dataclass
class MachineImage:
    """Byte-addressable sparse program image: text + data segments."""

    text: bytearray = field(default_factory=bytearray)
    data: bytearray = field(default_factory=bytearray)
    text_base: int = TEXT_BASE
    data_base: int = DATA_BASE

    @property
    def text_end(self) -> int:
        return self.text_base + len(self.text)

    def read_word(self, address: int) -> int:
        """Little-endian word read; reads outside stored bytes return 0."""
        for base, seg in ((self.text_base, self.text),
                          (self.data_base, self.data)):
            off = address - base
            if 0 <= off < len(seg):
                chunk = bytes(seg[off:off + 4])
                return int.from_bytes(chunk.ljust(4, b"\0"), "little")
        return 0

    def write_text_word(self, address: int, word: int) -> None:
        off = address - self.text_base
        self.text[off:off + 4] = word.to_bytes(4, "little")

    def insert_text_word(self, address: int, word: int) -> int:
        """Insert 4 bytes at `address`, shifting later bytes down.
        Returns the number of bytes moved."""
        off = address - self.text_base
        moved = len(self.text) - off
        self.text[off:off] = word.to_bytes(4, "little")
        return moved


@dataclass
class OpCounters:
    """Operation counters backing the machine-independent complexity checks."""

    lines_assembled: int = 0
    line_entries_walked: int = 0
    symbols_scanned: int = 0
    references_examined: int = 0
    bytes_moved: int = 0

    def snapshot(self) -> dict[str, int]:
        return {"lines_assembled": self.lines_assembled,
                "line_entries_walked": self.line_entries_walked,
                "symbols_scanned": self.symbols_scanned,
                "references_examined": self.references_examined,
                "bytes_moved": self.bytes_moved}

    def reset(self) -> None:
        self.lines_assembled = 0
        self.line_entries_walked = 0
        self.symbols_scanned = 0
        self.references_examined = 0
        self.bytes_moved = 0


@dataclass
class AssemblyState:
    lines: list[LineEntry] = field(default_factory=list)
    symbols: list[SymbolEntry] = field(default_factory=list)
    image: MachineImage = field(default_factory=MachineImage)
    counters: OpCounters = field(default_factory=OpCounters)

    # -- symbol table ------------------------------------------------------

    def find_symbol(self, label: str) -> SymbolEntry | None:
        """Linear scan by design; the complexity model counts on it."""
        counters = self.counters
        for sym in self.symbols:
            counters.symbols_scanned += 1
            if sym.label == label:
                return sym
        return None

    def find_or_create_symbol(self, label: str) -> SymbolEntry:
        sym = self.find_symbol(label)
        if sym is None:
            sym = SymbolEntry(label)
            self.symbols.append(sym)
        return sym

    def record_reference(self, label: str, line_number: int,
                         address: int) -> SymbolEntry:
        """Append a (line, address) reference, deduplicated."""
        sym = self.find_or_create_symbol(label)
        for ref in sym.references:
            if ref.line_number == line_number and ref.address == address:
                return sym
        sym.references.append(Reference(line_number, address))
        return sym

    def reference_is_stale(self, sym: SymbolEntry, ref: Reference) -> bool:
        """A reference is stale when its line no longer references the
        symbol.  Stale references are kept and skipped, never scanned away."""
        if not 0 <= ref.line_number < len(self.lines):
            return True
        entry = self.lines[ref.line_number]
        return entry.ref_label != sym.label or entry.address != ref.address

    # -- line table --------------------------------------------------------

    def address_for_line(self, line_number: int) -> int | None:
        if not 0 <= line_number < len(self.lines):
            raise LineOutOfRange(f"line {line_number} out of range")
        return self.lines[line_number].address

    def aggregated_diagnostics(self) -> list[Diagnostic]:
        out: list[Diagnostic] = []
        for entry in self.lines:
            out.extend(sorted(entry.diagnostics, key=lambda d: d.start))
        return out

    # -- observational equality -------------------------------------------

    def projection(self) -> dict:
        """The cross-mode comparison view: image bytes, per-line
        (address, length, instruction, error) tuples, symbol addresses and
        non-stale reference sets.  Symbols that are neither declared nor
        referenced by any current line are invisible."""
        symbols = {}
        for sym in self.symbols:
            refs = sorted((r.line_number, r.address) for r in sym.references
                          if not self.reference_is_stale(sym, r))
            if sym.declaration_line is None and not refs:
                continue
            symbols[sym.label] = {
                "declaration_line": sym.declaration_line,
                "address": sym.address,
                "references": refs,
            }
        return {
            "text": bytes(self.image.text),
            "data": bytes(self.image.data),
            "lines": [(e.address, e.length, e.instruction, e.error)
                      for e in self.lines],
            "symbols": symbols,
        }

    def dump(self) -> str:
        """Deterministic text serialization (see docs/state-dump.md)."""
        out = ["[lines]"]
        for e in self.lines:
            addr = f"0x{e.address:08X}" if e.address is not None else "-"
            word = f"0x{e.instruction:08X}" if e.instruction is not None else "-"
            err = e.error_message if e.error else ""
            out.append(f"{e.source_line_number:>5} {e.kind.value:<11} "
                       f"{addr} len={e.length} word={word} "
                       f"err={e.error:d}{' ' + err if err else ''}")
        out.append("[symbols]")
        for sym in sorted(self.symbols, key=lambda s: s.label):
            refs = sorted((r.line_number, r.address) for r in sym.references
                          if not self.reference_is_stale(sym, r))
            if sym.declaration_line is None and not refs:
                continue
            addr = f"0x{sym.address:08X}" if sym.address is not None else "-"
            decl = sym.declaration_line if sym.declaration_line is not None else "-"
            ref_text = " ".join(f"({ln},0x{ad:X})" for ln, ad in refs)
            out.append(f"{sym.label} decl={decl} addr={addr} refs=[{ref_text}]")
        out.append("[text]")
        out.append(self.image.text.hex())
        out.append("[data]")
        out.append(self.image.data.hex())
        return "\n".join(out) + "\n"
