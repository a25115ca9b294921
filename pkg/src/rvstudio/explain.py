"""Structured breakdowns behind the three explain dialogs.

Everything here is pure data for a frontend to draw: instruction bit
fields, two's-complement integers, and IEEE 754 binary64 values.
Presentation (colors, layout) is deliberately someone else's job.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .disasm import disassemble_word
from .isa import FieldSlice, Undecodable, bitfields, decode, to_unsigned

DOUBLE_BIAS = 1023
MANTISSA_BITS = 52
EXPONENT_BITS = 11


@dataclass(frozen=True)
class ExplainedField:
    name: str
    high_bit: int
    low_bit: int
    value: int
    note: str

    def to_json(self) -> dict:
        return {"name": self.name, "high_bit": self.high_bit,
                "low_bit": self.low_bit, "value": self.value,
                "note": self.note}


@dataclass(frozen=True)
class InstructionExplanation:
    word: int
    mnemonic: str
    format: str
    fields: tuple[ExplainedField, ...]
    operand_summary: str
    immediate_decimal: int | None

    def to_json(self) -> dict:
        return {"word": f"0x{self.word:08X}", "mnemonic": self.mnemonic,
                "format": self.format,
                "fields": [f.to_json() for f in self.fields],
                "operand_summary": self.operand_summary,
                "immediate_decimal": self.immediate_decimal}


@dataclass(frozen=True)
class IntExplanation:
    word: int
    bits: str
    sign_bit: int
    magnitude_rule: str
    decimal_value: int

    def to_json(self) -> dict:
        return {"word": f"0x{self.word:08X}", "bits": self.bits,
                "sign_bit": self.sign_bit,
                "magnitude_rule": self.magnitude_rule,
                "decimal_value": self.decimal_value}


@dataclass(frozen=True)
class DoubleExplanation:
    bits: int
    sign: int
    exponent_bits: int
    biased_exponent: int
    unbiased_exponent: int
    mantissa_bits: int
    significand: float
    decimal_value: float
    classification: str   # normal | subnormal | zero | inf | nan

    def to_json(self) -> dict:
        return {"bits": f"0x{self.bits:016X}", "sign": self.sign,
                "exponent_bits": self.exponent_bits,
                "biased_exponent": self.biased_exponent,
                "unbiased_exponent": self.unbiased_exponent,
                "mantissa_bits": self.mantissa_bits,
                "significand": self.significand,
                "decimal_value": repr(self.decimal_value),
                "class": self.classification}


def _field_note(slice_: FieldSlice, decoded) -> str:
    name = slice_.name
    if name.startswith("imm") and decoded.immediate is not None:
        return (f"0x{slice_.value:X} -> "
                f"{'sign-extended ' if decoded.immediate < 0 else ''}"
                f"{decoded.immediate}")
    if name in ("rd", "rs1", "rs2"):
        return f"x{slice_.value}"
    if name == "shamt":
        return f"shift by {slice_.value}"
    if name == "opcode":
        return f"{decoded.mnemonic} ({decoded.format}-format)"
    return f"0x{slice_.value:X}"


def explain_instruction(word: int) -> InstructionExplanation:
    """Per-field breakdown of a decodable instruction word."""
    decoded = decode(word)
    if decoded is None:
        raise Undecodable(f"0x{to_unsigned(word):08X} does not decode")
    fields = tuple(ExplainedField(s.name, s.high_bit, s.low_bit, s.value,
                                  _field_note(s, decoded))
                   for s in bitfields(word))
    return InstructionExplanation(
        word=to_unsigned(word),
        mnemonic=decoded.mnemonic,
        format=decoded.format,
        fields=fields,
        operand_summary=disassemble_word(word, 0),
        immediate_decimal=decoded.immediate,
    )


def explain_signed_int(word: int) -> IntExplanation:
    """Two's-complement reading of a 32-bit word."""
    word = to_unsigned(word)
    sign = word >> 31
    value = word - (1 << 32) if sign else word
    if sign:
        inverted = word ^ 0xFFFFFFFF
        rule = (f"sign bit is 1: invert all bits (0x{inverted:08X}), add one "
                f"(0x{inverted + 1:08X} = {inverted + 1}), negate: {value}")
    else:
        rule = f"sign bit is 0: plain binary magnitude {value}"
    return IntExplanation(word=word, bits=format(word, "032b"),
                          sign_bit=sign, magnitude_rule=rule,
                          decimal_value=value)


def explain_double(bits: int) -> DoubleExplanation:
    """IEEE 754 binary64 field split of a 64-bit pattern."""
    bits &= (1 << 64) - 1
    sign = bits >> 63
    exponent = (bits >> MANTISSA_BITS) & ((1 << EXPONENT_BITS) - 1)
    mantissa = bits & ((1 << MANTISSA_BITS) - 1)
    value = struct.unpack("<d", bits.to_bytes(8, "little"))[0]

    if exponent == (1 << EXPONENT_BITS) - 1:
        classification = "nan" if mantissa else "inf"
        significand = float("nan") if mantissa else 1.0
        unbiased = exponent - DOUBLE_BIAS
    elif exponent == 0:
        classification = "zero" if mantissa == 0 else "subnormal"
        significand = mantissa / (1 << MANTISSA_BITS)
        unbiased = 1 - DOUBLE_BIAS  # subnormals use the minimum exponent
    else:
        classification = "normal"
        significand = 1.0 + mantissa / (1 << MANTISSA_BITS)
        unbiased = exponent - DOUBLE_BIAS
    return DoubleExplanation(
        bits=bits, sign=sign, exponent_bits=exponent,
        biased_exponent=exponent, unbiased_exponent=unbiased,
        mantissa_bits=mantissa, significand=significand,
        decimal_value=value, classification=classification,
    )


def double_bits_from_float(value: float) -> int:
    return int.from_bytes(struct.pack("<d", value), "little")
