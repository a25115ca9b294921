"""Line classification, tokenization, and diagnostic spans."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rvstudio.parsing import (
    SOURCE_LINE_MAX,
    LineKind,
    classify_line,
    parse_line,
    parse_register,
    strip_comment,
)


class TestClassification:
    @pytest.mark.parametrize("text,kind", [
        ("", LineKind.EMPTY),
        ("   \t ", LineKind.EMPTY),
        ("# a comment", LineKind.COMMENT),
        ("   # indented comment", LineKind.COMMENT),
        ("loop:", LineKind.LABEL),
        ("  loop:  # with comment", LineKind.LABEL),
        (".word 1, 2", LineKind.DATA),
        (".unknown 1", LineKind.DATA),
        ("ecall", LineKind.META),
        ("addi x1, x2, -121", LineKind.INSTRUCTION),
        ("garbage here", LineKind.INSTRUCTION),
        ("xor:", LineKind.LABEL),          # label beats mnemonic
        ('.string "a:b"', LineKind.DATA),  # colon inside string
    ])
    def test_kinds(self, text, kind):
        assert classify_line(text) == kind

    def test_classify_agrees_with_parse(self):
        samples = ["", " ", "# c", "x:", ".word 1", "ecall", "add x1, x2, x3",
                   "junk", ".string \"a\"", "  lw x1, 0(x2) # c"]
        for text in samples:
            for line_number in (0, 7):
                assert parse_line(text, line_number).kind == \
                    classify_line(text)

    @given(st.text(alphabet=st.characters(codec="ascii",
                                          exclude_characters="\n"),
                   max_size=40))
    @settings(max_examples=300)
    def test_classify_total_and_stable(self, text):
        kind = classify_line(text)
        assert kind == classify_line(text)
        assert parse_line(text, 3).kind == kind
        if kind == LineKind.EMPTY:
            assert text.strip() == ""


class TestCommentStripping:
    def test_plain(self):
        assert strip_comment("add x1, x2, x3 # hi") == ("add x1, x2, x3 ", True)

    def test_hash_inside_string(self):
        code, has = strip_comment('.string "a#b" # real')
        assert code == '.string "a#b" '
        assert has is True

    def test_no_comment(self):
        assert strip_comment("add x1, x2, x3") == ("add x1, x2, x3", False)


class TestInstructionParsing:
    def test_spec_example(self):
        line = parse_line("addi x1, x2, -121", 0)
        assert line.kind is LineKind.INSTRUCTION
        assert not line.diagnostics
        instr = line.instruction
        assert instr.mnemonic == "addi"
        assert [op.value for op in instr.operands] == [1, 2, -121]

    def test_abi_register_names(self):
        line = parse_line("add sp, ra, t6", 0)
        assert [op.value for op in line.instruction.operands] == [2, 1, 31]

    def test_mem_operand(self):
        line = parse_line("lw a0, -4(sp)", 0)
        op = line.instruction.operands[1]
        assert (op.kind, op.value, op.base) == ("mem", -4, 2)

    def test_hex_immediate(self):
        line = parse_line("lui x1, 0x12345", 0)
        assert line.instruction.operands[1].value == 0x12345

    def test_unknown_mnemonic_span(self):
        line = parse_line("addq x1, x2, 3", 4)
        assert line.kind is LineKind.INSTRUCTION
        assert line.instruction is None
        [diag] = line.diagnostics
        assert diag.code == "unknown-mnemonic"
        assert diag.line_number == 4
        assert "addq x1, x2, 3"[diag.start:diag.end] == "addq"

    def test_operand_arity_diagnostic(self):
        line = parse_line("addi x1, x2", 0)
        assert [d.code for d in line.diagnostics] == ["operand-arity"]

    def test_bad_register_span(self):
        text = "add x1, x99, x2"
        [diag] = parse_line(text, 0).diagnostics
        assert diag.code == "bad-operand"
        assert text[diag.start:diag.end] == "x99"

    def test_label_target_parses_as_symbol(self):
        line = parse_line("bne x1, x0, loop", 0)
        op = line.instruction.operands[2]
        assert (op.kind, op.value) == ("sym", "loop")

    def test_numeric_target_parses_as_immediate(self):
        op = parse_line("jal x1, 0x10", 0).instruction.operands[1]
        assert (op.kind, op.value) == ("imm", 16)

    def test_trailing_comment_ignored(self):
        line = parse_line("nop # does nothing", 0)
        assert not line.diagnostics
        assert line.instruction.mnemonic == "nop"

    def test_negative_hex_rejected(self):
        line = parse_line("addi x1, x2, -0x10", 0)
        assert line.diagnostics[0].code == "bad-operand"


class TestLabelParsing:
    def test_simple(self):
        line = parse_line("loop:", 0)
        assert line.kind is LineKind.LABEL
        assert line.label == "loop"
        assert not line.diagnostics

    def test_underscore_and_digits(self):
        assert parse_line("_l00p:", 0).label == "_l00p"

    def test_duplicate_colon(self):
        line = parse_line("a:b:", 0)
        assert line.label is None
        assert line.diagnostics[0].code == "duplicate-colon"

    def test_bad_name(self):
        line = parse_line("1abc:", 0)
        assert line.label is None
        assert line.diagnostics[0].code == "bad-operand"

    def test_label_with_comment(self):
        assert parse_line("done:   # finished", 2).label == "done"


class TestDataParsing:
    def test_word_list(self):
        line = parse_line(".word 1, -2, 0x10", 0)
        assert line.data.values == (1, -2, 16)
        assert line.data.byte_length == 12
        assert line.data.to_bytes() == (b"\x01\x00\x00\x00"
                                        b"\xfe\xff\xff\xff"
                                        b"\x10\x00\x00\x00")

    def test_double(self):
        line = parse_line(".double 2.5, -1e3", 0)
        assert line.data.byte_length == 16
        import struct
        assert struct.unpack("<2d", line.data.to_bytes()) == (2.5, -1000.0)

    def test_string_byte_length_spec_example(self):
        line = parse_line('.string "hi"', 0)
        assert line.data.byte_length == 4
        assert line.data.to_bytes() == b"hi\0\0"

    def test_string_escapes(self):
        line = parse_line(r'.string "a\n\t\"\\b"', 0)
        assert line.data.values[0] == b'a\n\t"\\b'

    def test_string_padding_multiple_of_four(self):
        for text, length in [('""', 4), ('"abc"', 4), ('"abcd"', 8),
                             ('"abcdefg"', 8)]:
            line = parse_line(f".string {text}", 0)
            assert line.data.byte_length == length
            assert len(line.data.to_bytes()) == length

    def test_unterminated_string(self):
        line = parse_line('.string "oops', 0)
        assert line.data is None
        assert line.diagnostics[0].code == "unterminated-string"

    def test_unknown_directive(self):
        line = parse_line(".half 1", 0)
        assert line.kind is LineKind.DATA
        assert line.diagnostics[0].code == "bad-directive"

    def test_bad_word_value(self):
        line = parse_line(".word 1, banana", 0)
        assert line.diagnostics[0].code == "bad-operand"
        text = ".word 1, banana"
        d = line.diagnostics[0]
        assert text[d.start:d.end] == "banana"

    def test_word_range(self):
        assert not parse_line(".word 4294967295", 0).diagnostics
        assert not parse_line(".word -2147483648", 0).diagnostics
        assert parse_line(".word 4294967296", 0).diagnostics


class TestLineLimit:
    def test_too_long_rejected(self):
        text = "addi x1, x2, 3" + " " * SOURCE_LINE_MAX
        line = parse_line(text, 0)
        assert line.diagnostics[0].code == "line-too-long"
        assert line.instruction is None

    def test_exactly_max_is_fine(self):
        text = "nop" + " " * (SOURCE_LINE_MAX - 3)
        assert len(text) == SOURCE_LINE_MAX
        assert not parse_line(text, 0).diagnostics


class TestProperties:
    @given(st.text(alphabet=st.characters(codec="ascii",
                                          exclude_characters="\n"),
                   max_size=60))
    @settings(max_examples=300)
    def test_lossless_and_pure(self, text):
        a = parse_line(text, 5)
        b = parse_line(text, 5)
        assert a.source_text == text
        assert a.kind == b.kind
        assert [d.code for d in a.diagnostics] == \
            [d.code for d in b.diagnostics]
        for diag in a.diagnostics:
            assert 0 <= diag.start < diag.end <= max(len(text), diag.end)
            assert diag.line_number == 5
            if len(text) <= SOURCE_LINE_MAX:
                assert diag.end <= len(text)

    def test_register_parser(self):
        assert parse_register("x0") == 0
        assert parse_register("x31") == 31
        assert parse_register("x32") is None
        assert parse_register("zero") == 0
        assert parse_register("a7") == 17
        assert parse_register("s11") == 27
        assert parse_register("q1") is None
