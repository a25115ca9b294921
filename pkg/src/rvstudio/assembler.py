"""Whole-program assembly: one forward pass with reference backpatching.

This is the unoptimized mode, and also the ground truth the incremental
engine is tested against.  Errors never abort a build; invalid instruction
lines keep a 4-byte placeholder word and carry diagnostics.
"""

from __future__ import annotations

from .isa import (
    INSTRUCTION_TABLE,
    PSEUDO_SCHEMAS,
    EncodeError,
    Operand,
    ParsedInstruction,
    encode,
    encode_fields,
    expand_pseudo,
    to_signed,
)
from .model import (
    DATA_BASE,
    PLACEHOLDER_WORD,
    AssemblyState,
    LineEntry,
    OpCounters,
    Reference,
    SymbolEntry,
)
from .parsing import (
    SOURCE_LINE_MAX,
    Diagnostic,
    LineKind,
    ParsedLine,
    parse_line,
    strip_comment,
)


def split_lines(source: str) -> list[str]:
    """An empty buffer has zero lines; otherwise newline-separated."""
    return source.split("\n") if source else []


def _finish_entry(entry: LineEntry) -> None:
    if not entry.diagnostics:
        entry.error = False
        entry.error_message = None
        return
    entry.diagnostics.sort(key=lambda d: d.start)
    entry.error = True
    entry.error_message = entry.diagnostics[0].message


def _clear_word(entry: LineEntry) -> None:
    entry.set_word(None)
    entry.mnemonic = None
    entry.format = None
    entry.imm_full = None


def assemble_line_entry(state: AssemblyState, line_number: int, text: str,
                        word_address: int, *, defer_unresolved: bool,
                        parsed: ParsedLine | None = None) -> LineEntry:
    """Assemble one source line into a line-table entry.

    Instruction lines are placed at `word_address` and any symbol reference
    is recorded.  With `defer_unresolved` an unbound label encodes as offset
    0 awaiting backpatch; otherwise it is an undefined-label error.  The
    machine image is not touched here.
    """
    state.counters.lines_assembled += 1
    if parsed is None:
        parsed = parse_line(text, line_number)
    entry = LineEntry(line_number, text[:SOURCE_LINE_MAX], parsed.kind,
                      diagnostics=parsed.diagnostics)
    if parsed.kind not in (LineKind.INSTRUCTION, LineKind.META):
        _finish_entry(entry)
        return entry

    entry.address = word_address
    entry.length = 4
    word = None
    instr = parsed.instruction
    if instr is not None and not entry.diagnostics:
        try:
            if instr.mnemonic in PSEUDO_SCHEMAS:
                instr = expand_pseudo(instr)[0]
            sym_idx = next((i for i, op in enumerate(instr.operands)
                            if op.kind == "sym"), None)
            if sym_idx is None and instr.mnemonic in INSTRUCTION_TABLE \
                    and "target" in INSTRUCTION_TABLE[instr.mnemonic].operands:
                # Branch/jump to a fixed absolute address: its encoding
                # depends on this line's own address, so it must be
                # re-encoded whenever the line moves.
                entry.abs_target = True
            resolved = True
            if sym_idx is not None:
                op = instr.operands[sym_idx]
                label = str(op.value)
                entry.ref_label = label
                entry.ref_span = op.span
                sym = state.record_reference(label, line_number, word_address)
                if sym.address is not None:
                    target = sym.address
                elif defer_unresolved:
                    target = word_address  # encodes offset 0 until patched
                else:
                    entry.diagnostics.append(Diagnostic(
                        line_number, op.span[0], op.span[1],
                        "undefined-label", f"undefined label '{label}'"))
                    resolved = False
                if resolved:
                    ops = list(instr.operands)
                    ops[sym_idx] = Operand("imm", target, span=op.span)
                    instr = ParsedInstruction(instr.mnemonic, tuple(ops),
                                              instr.mnemonic_span)
            if resolved:
                word = encode(instr, word_address)
                entry.mnemonic = instr.mnemonic
                entry.format = INSTRUCTION_TABLE[instr.mnemonic].format
        except EncodeError as exc:
            entry.diagnostics.append(Diagnostic(
                line_number, exc.span[0], exc.span[1], exc.code, str(exc)))
            word = None
            entry.mnemonic = None
            entry.format = None

    if word is not None:
        entry.set_word(word)
        for slot, op in zip(INSTRUCTION_TABLE[instr.mnemonic].operands,
                            instr.operands):
            if slot == "target":
                entry.imm_full = to_signed(int(op.value) - word_address)
            elif slot in ("imm", "shamt", "imm20", "mem"):
                entry.imm_full = int(op.value)
    _finish_entry(entry)
    return entry


def reencode_patched(state: AssemblyState, sym: SymbolEntry,
                     ref: Reference) -> None:
    """Re-encode a referencing word after the symbol's address changed.

    Works from the decoded fields stored in the line entry, so it applies
    only to entries that assembled cleanly with a deferred offset."""
    entry = state.lines[ref.line_number]
    offset = to_signed(sym.address - ref.address)
    try:
        word = encode_fields(entry.mnemonic, entry.rd or 0, entry.rs1 or 0,
                             entry.rs2 or 0, offset)
    except EncodeError as exc:
        span = entry.ref_span or (0, 0)
        entry.diagnostics.append(Diagnostic(
            ref.line_number, span[0], span[1],
            "branch-offset-out-of-range", str(exc)))
        _clear_word(entry)
        state.image.write_text_word(ref.address, PLACEHOLDER_WORD)
        _finish_entry(entry)
        return
    entry.set_word(word)
    entry.imm_full = offset
    state.image.write_text_word(ref.address, word)


def resolve_references(state: AssemblyState, label: str) -> None:
    """Backpatch every non-stale reference after a symbol binds."""
    sym = state.find_symbol(label)
    if sym is None or sym.address is None:
        return
    for ref in sym.references:
        state.counters.references_examined += 1
        if state.reference_is_stale(sym, ref):
            continue
        reencode_patched(state, sym, ref)


def assemble_full(source: str,
                  counters: OpCounters | None = None) -> AssemblyState:
    """Assemble an entire source text from scratch."""
    state = AssemblyState(counters=counters if counters is not None
                          else OpCounters())
    image = state.image
    pending: list[SymbolEntry] = []

    def bind_pending(address: int) -> None:
        for sym in pending:
            sym.address = address
            resolve_references(state, sym.label)
        pending.clear()

    for number, text in enumerate(split_lines(source)):
        parsed = parse_line(text, number)

        if parsed.kind is LineKind.LABEL:
            state.counters.lines_assembled += 1
            entry = LineEntry(number, text[:SOURCE_LINE_MAX], LineKind.LABEL,
                              diagnostics=parsed.diagnostics)
            if parsed.label is not None:
                sym = state.find_or_create_symbol(parsed.label)
                if sym.declaration_line is not None:
                    code, _ = strip_comment(text)
                    start = len(code) - len(code.lstrip())
                    entry.diagnostics.append(Diagnostic(
                        number, start, len(code.rstrip()), "duplicate-label",
                        f"label '{parsed.label}' already declared on line "
                        f"{sym.declaration_line}"))
                else:
                    sym.declaration_line = number
                    pending.append(sym)
            _finish_entry(entry)
            state.lines.append(entry)
            continue

        entry = assemble_line_entry(state, number, text, image.text_end,
                                    defer_unresolved=True, parsed=parsed)
        if entry.bears_word():
            bind_pending(entry.address)
            word = entry.instruction if entry.instruction is not None \
                else PLACEHOLDER_WORD
            image.text.extend(word.to_bytes(4, "little"))
        elif parsed.kind is LineKind.DATA and parsed.data is not None \
                and not entry.error:
            address = DATA_BASE + len(image.data)
            bind_pending(address)
            entry.address = address
            entry.length = parsed.data.byte_length
            image.data.extend(parsed.data.to_bytes())
        state.lines.append(entry)

    # Trailing labels bind to the end of the text segment.
    bind_pending(image.text_end)

    # References to labels never declared: error + placeholder word.
    for sym in state.symbols:
        if sym.address is not None:
            continue
        for ref in sym.references:
            if state.reference_is_stale(sym, ref):
                continue
            entry = state.lines[ref.line_number]
            span = entry.ref_span or (0, 0)
            entry.diagnostics.append(Diagnostic(
                ref.line_number, span[0], span[1], "undefined-label",
                f"undefined label '{sym.label}'"))
            _clear_word(entry)
            image.write_text_word(ref.address, PLACEHOLDER_WORD)
            _finish_entry(entry)
    return state
