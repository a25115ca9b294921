"""Explainers: bit fields, two's complement, IEEE 754 binary64."""

import math
import random
import struct

import pytest

from rvstudio.explain import (
    double_bits_from_float,
    explain_double,
    explain_instruction,
    explain_signed_int,
)
from rvstudio.isa import Undecodable, bitfields


class TestExplainInstruction:
    def test_spec_addi_example(self):
        out = explain_instruction(0xF8710093)
        assert out.format == "I"
        assert out.mnemonic == "addi"
        assert out.immediate_decimal == -121
        imm_field = out.fields[0]
        assert imm_field.name == "imm[11:0]"
        assert imm_field.value == 0xF87
        assert "-121" in imm_field.note

    def test_nop(self):
        out = explain_instruction(0x00000013)
        assert out.format == "I"
        assert all(f.value == 0 for f in out.fields if f.name != "opcode")

    def test_r_format(self):
        out = explain_instruction(0x002081B3)
        assert out.format == "R"
        values = {f.name: f.value for f in out.fields}
        assert values["funct7"] == 0 and values["funct3"] == 0
        assert values["rs2"] == 2 and values["rs1"] == 1 and values["rd"] == 3

    def test_fields_are_exactly_isa_bitfields(self):
        for word in (0xF8710093, 0x002081B3, 0x00000073, 0xFE009EE3):
            explained = explain_instruction(word).fields
            raw = bitfields(word)
            assert [(f.name, f.high_bit, f.low_bit, f.value)
                    for f in explained] == \
                [(s.name, s.high_bit, s.low_bit, s.value) for s in raw]

    def test_undecodable(self):
        with pytest.raises(Undecodable):
            explain_instruction(0)

    def test_json_shape(self):
        payload = explain_instruction(0xF8710093).to_json()
        assert payload["word"] == "0xF8710093"
        assert payload["operand_summary"] == "addi x1, x2, -121"


class TestExplainSignedInt:
    @pytest.mark.parametrize("word,value", [
        (0xFFFFFF87, -121),
        (0x00000000, 0),
        (0x80000000, -2147483648),
        (0x7FFFFFFF, 2147483647),
        (0xFFFFFFFF, -1),
        (0x00000001, 1),
    ])
    def test_boundary_set(self, word, value):
        out = explain_signed_int(word)
        assert out.decimal_value == value
        assert out.sign_bit == (word >> 31)
        assert len(out.bits) == 32
        assert int(out.bits, 2) == word

    def test_negative_narrative_mentions_invert_and_add_one(self):
        out = explain_signed_int(0xFFFFFF87)
        assert "invert" in out.magnitude_rule
        assert "add one" in out.magnitude_rule

    def test_matches_native_reinterpretation(self):
        rng = random.Random(5)
        for _ in range(20000):
            word = rng.randrange(1 << 32)
            expected = struct.unpack("<i", struct.pack("<I", word))[0]
            assert explain_signed_int(word).decimal_value == expected


class TestExplainDouble:
    def test_canonical_one(self):
        out = explain_double(0x3FF0000000000000)
        assert (out.sign, out.biased_exponent, out.unbiased_exponent) == \
            (0, 1023, 0)
        assert out.mantissa_bits == 0
        assert out.decimal_value == 1.0
        assert out.classification == "normal"

    def test_zero(self):
        out = explain_double(0)
        assert out.classification == "zero"
        assert out.decimal_value == 0.0

    def test_spec_negative_example(self):
        out = explain_double(0xC004000000000000)
        assert out.sign == 1
        assert out.unbiased_exponent == 1
        assert out.decimal_value == -2.5

    @pytest.mark.parametrize("value,cls", [
        (float("inf"), "inf"), (float("-inf"), "inf"),
        (float("nan"), "nan"), (0.0, "zero"), (-0.0, "zero"),
        (5e-324, "subnormal"), (1.5, "normal"),
    ])
    def test_classification(self, value, cls):
        assert explain_double(double_bits_from_float(value)).classification \
            == cls

    def test_significand_reconstructs_value(self):
        for value in (1.0, -2.5, 3.141592653589793, 1e-300, 6.25e-310):
            out = explain_double(double_bits_from_float(value))
            rebuilt = ((-1) ** out.sign * out.significand
                       * 2.0 ** out.unbiased_exponent)
            assert rebuilt == value

    def test_bitcast_round_trip_random(self):
        rng = random.Random(17)
        for _ in range(20000):
            bits = rng.randrange(1 << 64)
            out = explain_double(bits)
            if out.classification == "nan":
                assert math.isnan(out.decimal_value)
                continue
            back = double_bits_from_float(out.decimal_value)
            assert back == bits
