"""Program-model invariants: line table, symbol table, image."""

import pytest

from rvstudio.assembler import assemble_full
from rvstudio.model import (
    DATA_BASE,
    TEXT_BASE,
    AssemblyState,
    LineOutOfRange,
    MachineImage,
)


class TestAddressForLine:
    def test_first_instruction_at_text_base(self):
        state = assemble_full("addi x1, x2, 3")
        assert state.address_for_line(0) == TEXT_BASE

    def test_four_byte_stride(self):
        state = assemble_full("nop\nnop\nnop")
        assert [state.address_for_line(i) for i in range(3)] == [0, 4, 8]

    def test_label_line_has_none(self):
        state = assemble_full("loop:\nnop")
        assert state.address_for_line(0) is None

    def test_out_of_range(self):
        state = assemble_full("nop")
        with pytest.raises(LineOutOfRange):
            state.address_for_line(5)


class TestSymbols:
    def test_find_after_declaration(self):
        state = assemble_full("loop:\nnop")
        sym = state.find_symbol("loop")
        assert sym.address == 0 and sym.declaration_line == 0

    def test_find_missing(self):
        state = assemble_full("nop")
        assert state.find_symbol("loop") is None

    def test_forward_reference_only(self):
        state = assemble_full("bne x1, x0, loop")
        sym = state.find_symbol("loop")
        assert sym.declaration_line is None
        assert len(sym.references) == 1
        assert sym.references[0].address == 0

    def test_record_reference_dedup(self):
        state = AssemblyState()
        state.record_reference("loop", 5, 0x14)
        state.record_reference("loop", 6, 0x18)
        state.record_reference("loop", 5, 0x14)
        assert len(state.find_symbol("loop").references) == 2

    def test_linear_scan_counts(self):
        state = AssemblyState()
        state.record_reference("a", 0, 0)
        state.record_reference("b", 1, 4)
        state.counters.reset()
        state.find_symbol("b")
        assert state.counters.symbols_scanned == 2

    def test_symbol_uniqueness(self):
        state = assemble_full("a:\nnop\na:\nbne x1, x0, a")
        labels = [s.label for s in state.symbols]
        assert len(labels) == len(set(labels))


class TestImageAgreement:
    def test_line_table_matches_image(self):
        state = assemble_full("nop\naddi x1, x2, 5\nbad bad\nnop")
        for entry in state.lines:
            if entry.bears_word():
                stored = state.image.read_word(entry.address)
                expected = entry.instruction if entry.instruction is not None \
                    else 0
                assert stored == expected

    def test_text_length_is_word_count(self):
        state = assemble_full("nop\n# comment\n\nloop:\nnop\n.word 7")
        words = sum(1 for e in state.lines if e.bears_word())
        assert len(state.image.text) == 4 * words
        assert len(state.image.text) == sum(e.length for e in state.lines
                                            if e.bears_word())

    def test_addresses_strictly_increasing(self):
        state = assemble_full("nop\nx:\nnop\n.word 1\nnop")
        text_addrs = [e.address for e in state.lines if e.bears_word()]
        assert text_addrs == sorted(text_addrs)
        assert all(b - a == 4 for a, b in zip(text_addrs, text_addrs[1:]))

    def test_data_segment_layout(self):
        state = assemble_full(".word 1\nnop\n.double 1.0\n.string \"abc\"")
        data_entries = [e for e in state.lines
                        if e.address is not None and e.address >= DATA_BASE]
        assert [e.address for e in data_entries] == [
            DATA_BASE, DATA_BASE + 4, DATA_BASE + 12]
        assert len(state.image.data) == 4 + 8 + 4


class TestImageReads:
    def test_read_word_outside_returns_zero(self):
        image = MachineImage()
        assert image.read_word(0x500) == 0

    def test_insert_shifts(self):
        image = MachineImage(text=bytearray(b"\x01\x00\x00\x00"))
        moved = image.insert_text_word(0, 0xAABBCCDD)
        assert moved == 4
        assert image.read_word(0) == 0xAABBCCDD
        assert image.read_word(4) == 1


class TestReferenceSoundness:
    def test_non_stale_refs_aligned_inside_text(self):
        src = ("a:\nbne x1, x0, a\nj b\nnop\nb:\nbeqz x5, a\n"
               ".word 9\nbnez x6, b")
        state = assemble_full(src)
        text_end = state.image.text_end
        for sym in state.symbols:
            for ref in sym.references:
                if state.reference_is_stale(sym, ref):
                    continue
                assert ref.address % 4 == 0
                assert 0 <= ref.address < text_end


class TestDump:
    def test_idempotent(self):
        src = "loop:\naddi x1, x1, -1\nbne x1, x0, loop\n.word 9"
        assert assemble_full(src).dump() == assemble_full(src).dump()

    def test_projection_tracks_dump(self):
        a = assemble_full("nop\nx:\nbne x1, x0, x")
        b = assemble_full("nop\nx:\nbne x1, x0, x")
        assert a.projection() == b.projection()

    def test_dump_sections(self):
        dump = assemble_full("nop").dump()
        for section in ("[lines]", "[symbols]", "[text]", "[data]"):
            assert section in dump
