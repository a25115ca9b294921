"""Edit-driven incremental assembly.

Keeps an AssemblyState consistent with a live document under a stream of
edit events.  Most character inserts re-assemble a single line in place;
the first character on an empty line inserts one word into the image and
shifts everything after it; deletes, cut/paste, colon keystrokes, label or
data edits, and mid-line splits fall back to a whole-program reassembly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .assembler import (
    assemble_full,
    assemble_line_entry,
    reencode_patched,
    split_lines,
)
from .model import (
    DATA_BASE,
    PLACEHOLDER_WORD,
    AssemblyState,
    LineEntry,
)
from .parsing import SOURCE_LINE_MAX, LineKind, WORD_KINDS, classify_line


class PositionOutOfBounds(ValueError):
    pass


@dataclass(frozen=True)
class InsertChar:
    line: int
    col: int
    char: str


@dataclass(frozen=True)
class InsertNewline:
    line: int
    col: int


@dataclass(frozen=True)
class DeleteRange:
    start_line: int
    start_col: int
    end_line: int
    end_col: int


@dataclass(frozen=True)
class Paste:
    line: int
    col: int
    text: str


EditEvent = InsertChar | InsertNewline | DeleteRange | Paste

# Classification tags.
LINE_CHANGE = "line_change"
LINE_INSERT = "line_insert"
EMPTY_LINE_INSERT = "empty_line_insert"
FULL = "full"


@dataclass(frozen=True)
class EditClass:
    tag: str
    reason: str | None = None


@dataclass
class Delta:
    """What an edit changed, for UIs and tests."""

    edit_class: str
    reason: str | None = None
    full_reassembly: bool = False
    image_changed: bool = False
    changed_lines: list[int] = field(default_factory=list)
    inserted_word_address: int | None = None
    symbols_touched: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"class": self.edit_class, "reason": self.reason,
                "full_reassembly": self.full_reassembly,
                "image_changed": self.image_changed,
                "changed_lines": self.changed_lines,
                "inserted_word_address": self.inserted_word_address,
                "symbols_touched": self.symbols_touched}


class Document:
    """The editor buffer as a list of lines.  An empty buffer has zero
    lines; editing at (0, 0) materializes the first line."""

    def __init__(self, text: str = ""):
        self.lines: list[str] = split_lines(text)

    def text(self) -> str:
        return "\n".join(self.lines)

    def line_count(self) -> int:
        return len(self.lines)

    def _check(self, line: int, col: int) -> None:
        if not self.lines:
            if line == 0 and col == 0:
                return
            raise PositionOutOfBounds(f"({line}, {col}) in an empty document")
        if not 0 <= line < len(self.lines):
            raise PositionOutOfBounds(f"line {line} out of range")
        if not 0 <= col <= len(self.lines[line]):
            raise PositionOutOfBounds(f"column {col} out of range on line {line}")

    def check_event(self, event: EditEvent) -> None:
        if isinstance(event, (InsertChar, InsertNewline, Paste)):
            self._check(event.line, event.col)
            if isinstance(event, InsertChar) and event.char == "\n":
                raise PositionOutOfBounds("newlines arrive via InsertNewline")
        elif isinstance(event, DeleteRange):
            self._check(event.start_line, event.start_col)
            self._check(event.end_line, event.end_col)
            if (event.start_line, event.start_col) > (event.end_line,
                                                      event.end_col):
                raise PositionOutOfBounds("inverted delete range")
        else:
            raise TypeError(f"not an edit event: {event!r}")

    def apply(self, event: EditEvent) -> None:
        """Mutate the buffer.  Callers classify before applying."""
        self.check_event(event)
        if not self.lines:
            self.lines = [""]
        lines = self.lines
        if isinstance(event, InsertChar):
            text = lines[event.line]
            lines[event.line] = (text[:event.col] + event.char
                                 + text[event.col:])
        elif isinstance(event, InsertNewline):
            text = lines[event.line]
            lines[event.line:event.line + 1] = [text[:event.col],
                                                text[event.col:]]
        elif isinstance(event, Paste):
            text = lines[event.line]
            merged = text[:event.col] + event.text + text[event.col:]
            lines[event.line:event.line + 1] = merged.split("\n")
            if lines == [""]:   # empty paste into an empty document
                self.lines = []
        else:
            first = lines[event.start_line][:event.start_col]
            last = lines[event.end_line][event.end_col:]
            lines[event.start_line:event.end_line + 1] = [first + last]
            if lines == [""]:
                self.lines = []


def classify_edit(state: AssemblyState, doc: Document,
                  event: EditEvent) -> EditClass:
    """Pure classification of an edit against the pre-edit document."""
    doc.check_event(event)
    if isinstance(event, DeleteRange):
        return EditClass(FULL, "delete")
    if isinstance(event, Paste):
        return EditClass(FULL, "paste")
    if isinstance(event, InsertNewline):
        if doc.lines and event.col not in (0, len(doc.lines[event.line])):
            # A mid-line split changes two lines at once; not an empty-line
            # insertion, so it takes the multi-line fallback route.
            return EditClass(FULL, "line-split")
        return EditClass(EMPTY_LINE_INSERT)

    pre_line = doc.lines[event.line] if doc.lines else ""
    post_line = pre_line[:event.col] + event.char + pre_line[event.col:]
    if len(post_line) > SOURCE_LINE_MAX:
        return EditClass(FULL, "line-too-long")
    if event.char == ":":
        return EditClass(FULL, "colon")
    pre_kind = state.lines[event.line].kind if state.lines else LineKind.EMPTY
    if pre_kind in (LineKind.DATA, LineKind.LABEL):
        return EditClass(FULL, "data-or-label-edit")
    post_kind = classify_line(post_line)
    if post_kind in (LineKind.DATA, LineKind.LABEL):
        return EditClass(FULL, "becomes-data-or-label")
    pre_word = pre_kind in WORD_KINDS
    post_word = post_kind in WORD_KINDS
    if not pre_word and post_word:
        if pre_kind is LineKind.EMPTY:
            return EditClass(LINE_INSERT)
        return EditClass(FULL, "comment-becomes-code")
    if pre_word and not post_word:
        # A '#' ahead of the mnemonic comments the word away; the word
        # census changes, which single-line reassembly cannot express.
        return EditClass(FULL, "code-becomes-comment")
    return EditClass(LINE_CHANGE)


def _shift_line_numbers(state: AssemblyState, first_index: int) -> None:
    """Renumber everything at or after a newly inserted line-table slot."""
    counters = state.counters
    for entry in state.lines[first_index:]:
        counters.line_entries_walked += 1
        entry.source_line_number += 1
    for sym in state.symbols:
        counters.symbols_scanned += 1
        if sym.declaration_line is not None \
                and sym.declaration_line >= first_index:
            sym.declaration_line += 1
        for ref in sym.references:
            counters.references_examined += 1
            if ref.line_number >= first_index:
                ref.line_number += 1


def insert_empty_entry(state: AssemblyState, index: int) -> None:
    """The empty-line insertion: a line-table entry appears, the machine
    image does not change."""
    _shift_line_numbers(state, index)
    state.lines.insert(index, LineEntry(index, "", LineKind.EMPTY))


def _next_word_address(state: AssemblyState, line_number: int) -> int:
    """Text address the word inserted at `line_number` must take over."""
    counters = state.counters
    for entry in state.lines[line_number + 1:]:
        counters.line_entries_walked += 1
        if entry.bears_word():
            return entry.address
    return state.image.text_end


def insert_instruction_word(state: AssemblyState, line_number: int,
                            text: str) -> tuple[LineEntry, list[str]]:
    """A line just went from empty to non-empty instruction text: run the
    five-step insertion procedure.  Returns the new entry and the labels
    whose crossing references were re-encoded."""
    address = _next_word_address(state, line_number)

    # 1. Assemble the line and its line-table entry, recording a symbol
    #    reference when it names a label.
    entry = assemble_line_entry(state, line_number, text, address,
                                defer_unresolved=False)
    state.lines[line_number] = entry
    word = entry.instruction if entry.instruction is not None \
        else PLACEHOLDER_WORD

    # 2. Insert the word, moving all subsequent text bytes down.
    state.counters.bytes_moved += state.image.insert_text_word(address, word)

    # 3. Update addresses of all later line-table entries (line numbers are
    #    already correct: the empty line existed before this keystroke).
    #    Lines that branch to a fixed absolute address encode an offset from
    #    their own (now shifted) address, so they re-assemble in place.
    counters = state.counters
    later_entries = state.lines[line_number + 1:]
    counters.line_entries_walked += len(later_entries)
    relocated = []
    for later in later_entries:
        addr = later.address
        if addr is not None and addr < DATA_BASE:
            later.address = addr + 4
            if later.abs_target:
                relocated.append(later)
    for later in relocated:
        reassemble_line(state, later.source_line_number, later.source_line)

    # 4. Update symbol and reference addresses past the insertion point.
    #    A label declared after the inserted line shifts with its code; a
    #    label declared above with no code line in between was hanging
    #    across the insertion and now binds to the new word itself.
    #    Data-segment addresses never move.
    prev_code_line = -1
    walked_back = 0
    for index in range(line_number - 1, -1, -1):
        walked_back += 1
        before = state.lines[index]
        if before.bears_word() or (before.kind is LineKind.DATA
                                   and before.length > 0):
            prev_code_line = index
            break
    counters.line_entries_walked += walked_back
    counters.symbols_scanned += len(state.symbols)
    for sym in state.symbols:
        decl = sym.declaration_line
        if decl is not None and sym.address is not None:
            if decl > line_number:
                if sym.address < DATA_BASE:
                    sym.address += 4
            elif decl > prev_code_line:
                sym.address = address
        refs = sym.references
        counters.references_examined += len(refs)
        for ref in refs:
            if ref.address >= address and ref.line_number != line_number:
                ref.address += 4

    # 5. Fix references whose declaration/use interval straddles the new
    #    word, forward or backward.
    touched = []
    counters.symbols_scanned += len(state.symbols)
    for sym in state.symbols:
        sym_addr = sym.address
        if sym_addr is None:
            counters.references_examined += len(sym.references)
            continue
        refs = sym.references
        counters.references_examined += len(refs)
        for ref in refs:
            ref_addr = ref.address
            if (sym_addr <= address <= ref_addr
                    or ref_addr <= address <= sym_addr):
                if state.reference_is_stale(sym, ref):
                    continue
                reencode_patched(state, sym, ref)
                touched.append(sym.label)
    return entry, touched


def reassemble_line(state: AssemblyState, line_number: int,
                    text: str) -> LineEntry:
    """Re-assemble a single line in place.  The word at its existing
    address is overwritten; nothing else moves.  A reference the line no
    longer makes stays in the symbol table as a stale entry."""
    old = state.lines[line_number]
    entry = assemble_line_entry(state, line_number, text, old.address,
                                defer_unresolved=False)
    state.lines[line_number] = entry
    if entry.bears_word():
        word = entry.instruction if entry.instruction is not None \
            else PLACEHOLDER_WORD
        state.image.write_text_word(entry.address, word)
    return entry


def apply_edit(state: AssemblyState, doc: Document,
               event: EditEvent) -> tuple[AssemblyState, EditClass, Delta]:
    """Apply one edit to the document and bring the state along, choosing
    the incremental route or the full fallback per the classification."""
    cls = classify_edit(state, doc, event)
    had_lines = bool(doc.lines)
    doc.apply(event)

    if cls.tag == FULL:
        old_text = bytes(state.image.text)
        old_data = bytes(state.image.data)
        new_state = assemble_full(doc.text(), counters=state.counters)
        delta = Delta(FULL, cls.reason, full_reassembly=True,
                      image_changed=(bytes(new_state.image.text) != old_text
                                     or bytes(new_state.image.data) != old_data))
        return new_state, cls, delta

    if cls.tag == EMPTY_LINE_INSERT:
        assert isinstance(event, InsertNewline)
        if not had_lines:
            insert_empty_entry(state, 0)
            insert_empty_entry(state, 1)
            changed = [0, 1]
        else:
            index = event.line if event.col == 0 else event.line + 1
            insert_empty_entry(state, index)
            changed = [index]
        return state, cls, Delta(EMPTY_LINE_INSERT, changed_lines=changed)

    assert isinstance(event, InsertChar)
    if not had_lines:
        insert_empty_entry(state, 0)
    line = event.line
    text = doc.lines[line]

    if cls.tag == LINE_INSERT:
        entry, symbols = insert_instruction_word(state, line, text)
        if entry.ref_label:
            symbols.insert(0, entry.ref_label)
        delta = Delta(LINE_INSERT, image_changed=True, changed_lines=[line],
                      inserted_word_address=entry.address,
                      symbols_touched=symbols)
        return state, cls, delta

    old_word = state.lines[line].instruction
    entry = reassemble_line(state, line, text)
    delta = Delta(LINE_CHANGE, changed_lines=[line],
                  image_changed=(entry.bears_word()
                                 and entry.instruction != old_word),
                  symbols_touched=[entry.ref_label] if entry.ref_label else [])
    return state, cls, delta


# -- edit-trace serialization (docs/edit-trace.md) --------------------------

def event_to_json(event: EditEvent) -> dict:
    if isinstance(event, InsertChar):
        return {"op": "insert_char", "line": event.line, "col": event.col,
                "ch": event.char}
    if isinstance(event, InsertNewline):
        return {"op": "insert_newline", "line": event.line, "col": event.col}
    if isinstance(event, DeleteRange):
        return {"op": "delete_range", "start_line": event.start_line,
                "start_col": event.start_col, "end_line": event.end_line,
                "end_col": event.end_col}
    if isinstance(event, Paste):
        return {"op": "paste", "line": event.line, "col": event.col,
                "text": event.text}
    raise TypeError(f"not an edit event: {event!r}")


def event_from_json(obj: dict) -> EditEvent:
    op = obj.get("op")
    if op == "insert_char":
        return InsertChar(obj["line"], obj["col"], obj["ch"])
    if op == "insert_newline":
        return InsertNewline(obj["line"], obj["col"])
    if op == "delete_range":
        return DeleteRange(obj["start_line"], obj["start_col"],
                           obj["end_line"], obj["end_col"])
    if op == "paste":
        return Paste(obj["line"], obj["col"], obj["text"])
    raise ValueError(f"unknown edit op {op!r}")


def typing_events(doc_line: int, col: int, text: str) -> list[EditEvent]:
    """The per-keystroke events for typing `text` into a line."""
    return [InsertChar(doc_line, col + i, ch) for i, ch in enumerate(text)]


def load_trace(path: str) -> list[EditEvent]:
    with open(path, encoding="utf-8") as fh:
        return [event_from_json(json.loads(line))
                for line in fh if line.strip()]


def save_trace(path: str, events: list[EditEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event_to_json(event)) + "\n")
