"""Per-line source analysis: classification, tokenization, diagnostics.

A line is exactly one of: empty, comment-only, label declaration, data
directive, metainstruction, or instruction.  Parsing never raises; every
problem lands in the returned diagnostics with a column span into the
original text.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from enum import Enum

from .isa import (
    ABI_REGISTER_NAMES,
    INSTRUCTION_TABLE,
    META_MNEMONICS,
    PSEUDO_SCHEMAS,
    Operand,
    ParsedInstruction,
)

SOURCE_LINE_MAX = 255


class LineKind(Enum):
    EMPTY = "empty"
    COMMENT = "comment"
    LABEL = "label"
    DATA = "data"
    META = "meta"
    INSTRUCTION = "instruction"


# Kinds that own one 32-bit word in the text segment.
WORD_KINDS = (LineKind.INSTRUCTION, LineKind.META)

DATA_DIRECTIVES = (".word", ".double", ".string")

LABEL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"-?[0-9]+\Z|0[xX][0-9a-fA-F]+\Z")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")
_MEM_RE = re.compile(r"(-?[0-9]+|0[xX][0-9a-fA-F]+)\(([^)]*)\)\Z")

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", '"': '"'}


@dataclass(frozen=True)
class Diagnostic:
    line_number: int
    start: int
    end: int
    code: str
    message: str

    def to_json(self) -> dict:
        return {"line": self.line_number, "start": self.start,
                "end": self.end, "code": self.code, "message": self.message}


@dataclass(frozen=True)
class DataItem:
    directive: str
    values: tuple
    byte_length: int

    def to_bytes(self) -> bytes:
        if self.directive == ".word":
            return b"".join((v & 0xFFFFFFFF).to_bytes(4, "little")
                            for v in self.values)
        if self.directive == ".double":
            return b"".join(struct.pack("<d", v) for v in self.values)
        raw = self.values[0] + b"\0"
        return raw + b"\0" * (-len(raw) % 4)


@dataclass
class ParsedLine:
    kind: LineKind
    source_text: str
    line_number: int
    label: str | None = None
    instruction: ParsedInstruction | None = None
    data: DataItem | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)


def strip_comment(text: str) -> tuple[str, bool]:
    """Drop a '#' comment (respecting double-quoted strings); returns the
    code part and whether a comment was present."""
    hash_pos = text.find("#")
    if hash_pos < 0:
        return text, False
    if text.find('"') < 0:
        return text[:hash_pos], True
    in_string = False
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if in_string:
            if c == "\\" and i + 1 < n:
                i += 1
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
        elif c == "#":
            return text[:i], True
        i += 1
    return text, False


def _classify_code(stripped: str, has_comment: bool) -> LineKind:
    if not stripped:
        return LineKind.COMMENT if has_comment else LineKind.EMPTY
    if stripped.endswith(":"):
        return LineKind.LABEL
    if stripped.startswith("."):
        return LineKind.DATA
    mnemonic = stripped.split(None, 1)[0].lower()
    if mnemonic in META_MNEMONICS:
        return LineKind.META
    return LineKind.INSTRUCTION


def classify_line(text: str) -> LineKind:
    """Classification only; precedence empty > comment > label > data >
    meta > instruction.  Unrecognizable non-empty text is an instruction
    (it will parse with diagnostics)."""
    code, has_comment = strip_comment(text)
    return _classify_code(code.strip(), has_comment)


def parse_register(token: str) -> int | None:
    t = token.lower()
    if t in ABI_REGISTER_NAMES:
        return ABI_REGISTER_NAMES[t]
    if len(t) >= 2 and t[0] == "x" and t[1:].isdigit():
        idx = int(t[1:])
        if 0 <= idx <= 31:
            return idx
    return None


def parse_integer(token: str) -> int | None:
    if not _INT_RE.match(token):
        return None
    return int(token, 16) if token[:2].lower().startswith("0x") \
        else int(token, 10)


def _split_operands(text: str, offset: int) -> list[tuple[str, int, int]]:
    """Split an operand list on commas; returns (token, start, end) with
    spans into the full line."""
    out = []
    for piece in text.split(","):
        stripped = piece.strip()
        start = offset + piece.index(stripped) if stripped else offset
        out.append((stripped, start, start + len(stripped)))
        offset += len(piece) + 1
    return out


def _parse_operand(slot: str, token: str, start: int, end: int,
                   line_number: int, diags: list[Diagnostic]) -> Operand | None:
    span = (start, end)

    def bad(message: str) -> None:
        diags.append(Diagnostic(line_number, start, end, "bad-operand", message))

    if not token:
        bad("missing operand")
        return None
    if slot in ("rd", "rs1", "rs2"):
        reg = parse_register(token)
        if reg is None:
            bad(f"'{token}' is not a register")
            return None
        return Operand("reg", reg, span=span)
    if slot in ("imm", "shamt", "imm20"):
        value = parse_integer(token)
        if value is None:
            bad(f"'{token}' is not an integer immediate")
            return None
        return Operand("imm", value, span=span)
    if slot == "mem":
        m = _MEM_RE.match(token)
        if not m:
            bad(f"'{token}' is not of the form imm(reg)")
            return None
        value = parse_integer(m.group(1))
        base = parse_register(m.group(2).strip())
        if value is None or base is None:
            bad(f"'{token}' has a bad offset or base register")
            return None
        return Operand("mem", value, base=base, span=span)
    if slot == "target":
        value = parse_integer(token)
        if value is not None:
            return Operand("imm", value, span=span)
        if LABEL_RE.match(token):
            return Operand("sym", token, span=span)
        bad(f"'{token}' is not a label or address")
        return None
    raise AssertionError(slot)


def _parse_instruction(code: str, line_number: int,
                       diags: list[Diagnostic]) -> ParsedInstruction | None:
    lead = len(code) - len(code.lstrip())
    parts = code.strip().split(None, 1)
    word = parts[0]
    mnemonic = word.lower()
    mspan = (lead, lead + len(word))
    if mnemonic in INSTRUCTION_TABLE:
        schema = INSTRUCTION_TABLE[mnemonic].operands
    elif mnemonic in PSEUDO_SCHEMAS:
        schema = PSEUDO_SCHEMAS[mnemonic]
    else:
        diags.append(Diagnostic(line_number, mspan[0], mspan[1],
                                "unknown-mnemonic",
                                f"unknown mnemonic '{word}'"))
        return None
    rest = parts[1] if len(parts) > 1 else ""
    if rest:
        tokens = _split_operands(rest, code.index(rest, lead + len(word)))
    else:
        tokens = []
    if len(tokens) != len(schema):
        diags.append(Diagnostic(
            line_number, mspan[0], mspan[1], "operand-arity",
            f"{mnemonic} takes {len(schema)} operands, got {len(tokens)}"))
        return None
    operands = []
    for slot, (token, start, end) in zip(schema, tokens):
        op = _parse_operand(slot, token, start, end, line_number, diags)
        if op is None:
            return None
        operands.append(op)
    return ParsedInstruction(mnemonic, tuple(operands), mspan)


def _parse_string_literal(text: str, start: int, line_number: int,
                          diags: list[Diagnostic]) -> bytes | None:
    if start >= len(text) or text[start] != '"':
        diags.append(Diagnostic(line_number, start, max(start + 1, len(text)),
                                "bad-operand", "expected a quoted string"))
        return None
    out = bytearray()
    i = start + 1
    while i < len(text):
        c = text[i]
        if c == '"':
            trailing = text[i + 1:].strip()
            if trailing:
                diags.append(Diagnostic(line_number, i + 1, len(text),
                                        "bad-operand",
                                        "unexpected text after string"))
                return None
            return bytes(out)
        if c == "\\":
            if i + 1 >= len(text):
                break
            esc = text[i + 1]
            out.extend(_ESCAPES.get(esc, esc).encode("utf-8"))
            i += 2
            continue
        out.extend(c.encode("utf-8"))
        i += 1
    diags.append(Diagnostic(line_number, start, len(text),
                            "unterminated-string", "string is not terminated"))
    return None


def _parse_data(code: str, line_number: int,
                diags: list[Diagnostic]) -> DataItem | None:
    lead = len(code) - len(code.lstrip())
    parts = code.strip().split(None, 1)
    directive = parts[0].lower()
    dspan = (lead, lead + len(parts[0]))
    if directive not in DATA_DIRECTIVES:
        diags.append(Diagnostic(line_number, dspan[0], dspan[1],
                                "bad-directive",
                                f"unknown directive '{parts[0]}'"))
        return None
    rest = parts[1] if len(parts) > 1 else ""
    if directive == ".string":
        qpos = code.find('"', dspan[1])
        if qpos == -1 or code[dspan[1]:qpos].strip():
            diags.append(Diagnostic(line_number, dspan[0], dspan[1],
                                    "bad-operand", "expected a quoted string"))
            return None
        raw = _parse_string_literal(code, qpos, line_number, diags)
        if raw is None:
            return None
        return DataItem(".string", (raw,), (len(raw) + 1 + 3) // 4 * 4)
    if not rest.strip():
        diags.append(Diagnostic(line_number, dspan[0], dspan[1],
                                "bad-operand", f"{directive} needs values"))
        return None
    tokens = _split_operands(rest, code.index(rest, dspan[1]))
    values = []
    for token, start, end in tokens:
        if directive == ".word":
            value = parse_integer(token)
            if value is None or not -(1 << 31) <= value < (1 << 32):
                diags.append(Diagnostic(line_number, start, end,
                                        "bad-operand",
                                        f"'{token}' is not a 32-bit integer"))
                return None
            values.append(value)
        else:
            if not _FLOAT_RE.match(token):
                diags.append(Diagnostic(line_number, start, end,
                                        "bad-operand",
                                        f"'{token}' is not a number"))
                return None
            values.append(float(token))
    width = 4 if directive == ".word" else 8
    return DataItem(directive, tuple(values), width * len(values))


def parse_line(text: str, line_number: int) -> ParsedLine:
    """Full tokenization of one source line.  Pure; never raises."""
    code, has_comment = strip_comment(text)
    kind = _classify_code(code.strip(), has_comment)
    line = ParsedLine(kind, text, line_number)
    diags = line.diagnostics

    if len(text) > SOURCE_LINE_MAX:
        diags.append(Diagnostic(line_number, SOURCE_LINE_MAX, len(text),
                                "line-too-long",
                                f"line exceeds {SOURCE_LINE_MAX} characters"))
        return line
    if kind in (LineKind.EMPTY, LineKind.COMMENT):
        return line

    if kind == LineKind.LABEL:
        stripped = code.strip()
        name = stripped[:-1].strip()
        start = len(code) - len(code.lstrip())
        if ":" in name:
            diags.append(Diagnostic(line_number, start,
                                    start + len(stripped), "duplicate-colon",
                                    "more than one ':' on a label line"))
        elif not LABEL_RE.match(name):
            diags.append(Diagnostic(line_number, start,
                                    start + len(stripped), "bad-operand",
                                    f"'{name}' is not a valid label name"))
        else:
            line.label = name
        return line

    if kind == LineKind.DATA:
        line.data = _parse_data(code, line_number, diags)
        return line

    line.instruction = _parse_instruction(code, line_number, diags)
    return line
