"""Rendering program memory back to assembly text.

Words render in base-mnemonic form (pseudoinstructions appear expanded) and
branch/jump targets as absolute hex addresses, so the pane reveals what the
encoder actually produced.  Registers render as x-names, never ABI names.
Undecodable words, including the placeholder, render as raw .word lines.
"""

from __future__ import annotations

from .isa import INSTRUCTION_TABLE, decode, to_unsigned
from .model import MachineImage


class MisalignedStart(ValueError):
    pass


def disassemble_word(word: int, address: int = 0) -> str:
    """Canonical text for one instruction word at the given address."""
    decoded = decode(word)
    if decoded is None:
        return f".word 0x{to_unsigned(word):08X}"
    m = decoded.mnemonic
    spec = INSTRUCTION_TABLE[m]
    fmt = decoded.format
    if m == "ecall":
        return "ecall"
    if fmt == "R":
        last = decoded.rs2 if "shamt" in spec.operands else f"x{decoded.rs2}"
        return f"{m} x{decoded.rd}, x{decoded.rs1}, {last}"
    if fmt == "I":
        if spec.operands and spec.operands[-1] == "mem":
            return f"{m} x{decoded.rd}, {decoded.immediate}(x{decoded.rs1})"
        return f"{m} x{decoded.rd}, x{decoded.rs1}, {decoded.immediate}"
    if fmt == "S":
        return f"{m} x{decoded.rs2}, {decoded.immediate}(x{decoded.rs1})"
    if fmt == "B":
        target = to_unsigned(address + decoded.immediate)
        return f"{m} x{decoded.rs1}, x{decoded.rs2}, 0x{target:x}"
    if fmt == "U":
        return f"{m} x{decoded.rd}, 0x{decoded.immediate:x}"
    target = to_unsigned(address + decoded.immediate)
    return f"{m} x{decoded.rd}, 0x{target:x}"


def disassemble_range(image: MachineImage, start: int,
                      count: int) -> list[tuple[int, int, str]]:
    """(address, word, text) rows for `count` words from `start`."""
    if start % 4:
        raise MisalignedStart(f"start address 0x{start:x} is not 4-aligned")
    rows = []
    for i in range(count):
        address = start + 4 * i
        word = image.read_word(address)
        rows.append((address, word, disassemble_word(word, address)))
    return rows
