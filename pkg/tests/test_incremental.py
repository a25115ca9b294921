"""Incremental engine: classification, the insertion procedure, equivalence."""

import json

import pytest

from rvstudio.assembler import assemble_full
from rvstudio.incremental import (
    EMPTY_LINE_INSERT,
    FULL,
    LINE_CHANGE,
    LINE_INSERT,
    DeleteRange,
    Document,
    InsertChar,
    InsertNewline,
    Paste,
    PositionOutOfBounds,
    apply_edit,
    classify_edit,
    event_from_json,
    event_to_json,
    typing_events,
)
from rvstudio.model import PLACEHOLDER_WORD
from trace_gen import random_trace


def drive(source: str, events) -> tuple:
    doc = Document(source)
    state = assemble_full(source)
    deltas = []
    for event in events:
        state, cls, delta = apply_edit(state, doc, event)
        deltas.append((cls, delta))
    return doc, state, deltas


def assert_equivalent(doc: Document, state) -> None:
    oracle = assemble_full(doc.text())
    assert state.projection() == oracle.projection()


class TestDocument:
    def test_round_trip(self):
        doc = Document("a\nb\n")
        assert doc.lines == ["a", "b", ""]
        assert doc.text() == "a\nb\n"

    def test_empty_text_zero_lines(self):
        assert Document("").lines == []

    def test_delete_to_empty_normalizes(self):
        doc = Document("abc")
        doc.apply(DeleteRange(0, 0, 0, 3))
        assert doc.lines == []

    def test_bounds_checked(self):
        doc = Document("ab")
        with pytest.raises(PositionOutOfBounds):
            doc.apply(InsertChar(1, 0, "x"))
        with pytest.raises(PositionOutOfBounds):
            doc.apply(InsertChar(0, 3, "x"))
        with pytest.raises(PositionOutOfBounds):
            doc.apply(InsertChar(0, 0, "\n"))
        with pytest.raises(PositionOutOfBounds):
            doc.apply(DeleteRange(0, 2, 0, 0))

    def test_paste_multiline(self):
        doc = Document("ab")
        doc.apply(Paste(0, 1, "X\nY"))
        assert doc.lines == ["aX", "Yb"]


class TestClassification:
    def setup_method(self):
        self.source = "\n".join([
            "addi x1, x2, 3",   # 0 instruction
            "",                 # 1 empty
            "# comment",        # 2 comment
            "loop:",            # 3 label
            ".word 5",          # 4 data
            "ecall",            # 5 meta
        ])
        self.state = assemble_full(self.source)
        self.doc = Document(self.source)

    def classify(self, event):
        return classify_edit(self.state, self.doc, event)

    def test_delete_always_full(self):
        assert self.classify(DeleteRange(0, 0, 0, 1)).reason == "delete"

    def test_paste_always_full(self):
        cls = self.classify(Paste(0, 0, "x"))
        assert (cls.tag, cls.reason) == (FULL, "paste")

    def test_colon_always_full(self):
        cls = self.classify(InsertChar(0, 4, ":"))
        assert (cls.tag, cls.reason) == (FULL, "colon")

    def test_data_line_edit_full(self):
        cls = self.classify(InsertChar(4, 6, "1"))
        assert (cls.tag, cls.reason) == (FULL, "data-or-label-edit")

    def test_label_line_edit_full(self):
        cls = self.classify(InsertChar(3, 0, "x"))
        assert (cls.tag, cls.reason) == (FULL, "data-or-label-edit")

    def test_becoming_data_full(self):
        doc = Document("word 1")
        state = assemble_full("word 1")
        cls = classify_edit(state, doc, InsertChar(0, 0, "."))
        assert (cls.tag, cls.reason) == (FULL, "becomes-data-or-label")

    def test_newline_at_line_end_is_empty_insert(self):
        assert self.classify(InsertNewline(0, 14)).tag == EMPTY_LINE_INSERT

    def test_newline_at_col0_is_empty_insert(self):
        assert self.classify(InsertNewline(0, 0)).tag == EMPTY_LINE_INSERT

    def test_midline_split_full(self):
        cls = self.classify(InsertNewline(0, 4))
        assert (cls.tag, cls.reason) == (FULL, "line-split")

    def test_char_on_empty_line_is_insert(self):
        assert self.classify(InsertChar(1, 0, "a")).tag == LINE_INSERT

    def test_whitespace_on_empty_line_is_change(self):
        assert self.classify(InsertChar(1, 0, " ")).tag == LINE_CHANGE

    def test_hash_on_empty_line_is_change(self):
        assert self.classify(InsertChar(1, 0, "#")).tag == LINE_CHANGE

    def test_instruction_edit_is_change(self):
        assert self.classify(InsertChar(0, 5, "1")).tag == LINE_CHANGE

    def test_meta_edit_is_change(self):
        assert self.classify(InsertChar(5, 5, "x")).tag == LINE_CHANGE

    def test_commenting_out_code_full(self):
        cls = self.classify(InsertChar(0, 0, "#"))
        assert (cls.tag, cls.reason) == (FULL, "code-becomes-comment")

    def test_comment_becoming_code_full(self):
        cls = self.classify(InsertChar(2, 0, "a"))
        assert (cls.tag, cls.reason) == (FULL, "comment-becomes-code")

    def test_comment_edit_after_hash_is_change(self):
        assert self.classify(InsertChar(2, 4, "z")).tag == LINE_CHANGE

    def test_line_too_long_full(self):
        long_line = "addi x1, x2, 3" + " " * 241
        assert len(long_line) == 255
        doc = Document(long_line)
        state = assemble_full(long_line)
        cls = classify_edit(state, doc, InsertChar(0, 20, " "))
        assert (cls.tag, cls.reason) == (FULL, "line-too-long")

    def test_classification_total_over_matrix(self):
        # every event kind against every line kind classifies
        events = [InsertChar(0, 0, c) for c in "a :#.5\""] + \
                 [InsertNewline(0, 0), DeleteRange(0, 0, 0, 0),
                  Paste(0, 0, "zz")]
        for line_text in ["", " ", "# c", "loop:", ".word 1", "ecall",
                          "nop", "junk"]:
            state = assemble_full(line_text)
            doc = Document(line_text)
            for event in events:
                assert classify_edit(state, doc, event).tag in (
                    FULL, LINE_CHANGE, LINE_INSERT, EMPTY_LINE_INSERT)

    def test_pure_function_of_inputs(self):
        event = InsertChar(0, 3, "x")
        assert self.classify(event) == self.classify(event)


class TestEmptyLineInsert:
    def test_image_untouched(self):
        src = "nop\naddi x1, x2, 3\nnop"
        doc, state, deltas = drive(src, [InsertNewline(1, 0)])
        assert bytes(state.image.text) == bytes(
            assemble_full(src).image.text)
        assert deltas[0][1].image_changed is False
        assert_equivalent(doc, state)

    def test_entry_inserted_and_renumbered(self):
        src = "loop:\nnop\nbne x1, x0, loop"
        doc, state, _ = drive(src, [InsertNewline(0, 5)])
        assert len(state.lines) == 4
        assert [e.source_line_number for e in state.lines] == [0, 1, 2, 3]
        sym = state.find_symbol("loop")
        assert sym.declaration_line == 0
        assert sym.references[0].line_number == 3
        assert_equivalent(doc, state)

    def test_newline_before_label_renumbers_declaration(self):
        src = "nop\nloop:\nbne x1, x0, loop"
        doc, state, _ = drive(src, [InsertNewline(1, 0)])
        assert state.find_symbol("loop").declaration_line == 2
        assert_equivalent(doc, state)

    def test_on_empty_document(self):
        doc, state, _ = drive("", [InsertNewline(0, 0)])
        assert doc.lines == ["", ""]
        assert len(state.lines) == 2
        assert_equivalent(doc, state)


class TestInsertInstructionWord:
    SRC = "loop:\naddi x1, x1, -1\nbne x1, x0, loop"

    def test_spec_five_step_fixture(self):
        # insert "add x2, x2, x2" between the addi and the bne
        events = [InsertNewline(1, 15)] + typing_events(2, 0, "add x2, x2, x2")
        doc, state, _ = drive(self.SRC, events)
        bne = state.lines[3]
        assert bne.address == 8
        assert bne.imm_full == -8
        assert state.find_symbol("loop").references[0].address == 8
        assert_equivalent(doc, state)

    def test_first_keystroke_places_placeholder(self):
        events = [InsertNewline(1, 15), InsertChar(2, 0, "a")]
        doc, state, deltas = drive(self.SRC, events)
        entry = state.lines[2]
        assert entry.error
        assert entry.length == 4
        assert state.image.read_word(4) == PLACEHOLDER_WORD
        assert deltas[-1][0].tag == LINE_INSERT
        assert deltas[-1][1].inserted_word_address == 4
        assert_equivalent(doc, state)

    def test_insert_after_all_references(self):
        src = "loop:\nbne x1, x0, loop\nnop"
        before = assemble_full(src)
        events = [InsertNewline(2, 3)] + typing_events(3, 0, "nop")
        doc, state, _ = drive(src, events)
        # branch word unchanged: nothing crossed
        assert state.lines[1].instruction == before.lines[1].instruction
        assert_equivalent(doc, state)

    def test_forward_reference_crossing(self):
        src = "beq x1, x2, end\nnop\nend:\nnop"
        events = [InsertNewline(0, 15)] + typing_events(1, 0, "nop")
        doc, state, _ = drive(src, events)
        assert state.lines[0].imm_full == 12
        assert_equivalent(doc, state)

    def test_inserted_line_with_reference(self):
        events = [InsertNewline(2, 16)] + typing_events(3, 0, "j loop")
        doc, state, _ = drive(self.SRC, events)
        sym = state.find_symbol("loop")
        assert {(r.line_number, r.address) for r in sym.references} == \
            {(2, 4), (3, 8)}
        assert_equivalent(doc, state)

    def test_reference_to_undefined_label_is_error(self):
        events = [InsertNewline(2, 16)] + typing_events(3, 0, "j gone")
        doc, state, _ = drive(self.SRC, events)
        entry = state.lines[3]
        assert entry.error
        assert entry.diagnostics[0].code == "undefined-label"
        assert_equivalent(doc, state)

    def test_typing_full_instruction_character_by_character(self):
        src = "nop\nnop"
        events = [InsertNewline(0, 3)] + \
            typing_events(1, 0, "addi x1, x2, -121")
        doc, state, deltas = drive(src, events)
        tags = [c.tag for c, _ in deltas]
        assert tags[0] == EMPTY_LINE_INSERT
        assert tags[1] == LINE_INSERT
        assert set(tags[2:]) == {LINE_CHANGE}
        assert state.lines[1].instruction == 0xF8710093
        assert state.image.read_word(4) == 0xF8710093
        assert_equivalent(doc, state)

    def test_image_grows_exactly_four_bytes(self):
        src = "nop\n\nnop"
        before = len(assemble_full(src).image.text)
        doc, state, _ = drive(src, [InsertChar(1, 0, "n")])
        assert len(state.image.text) == before + 4

    def test_insert_on_empty_document(self):
        doc, state, deltas = drive("", [InsertChar(0, 0, "n")])
        assert doc.lines == ["n"]
        assert len(state.lines) == 1
        assert state.lines[0].length == 4
        assert_equivalent(doc, state)

    def test_hanging_label_rebinds_to_new_word(self):
        src = "end:\nnop"
        # doc: nop / end: / (empty) ; then type over the empty line
        src = "nop\nend:\n\nnop"
        doc, state, _ = drive(src, typing_events(2, 0, "nop"))
        assert state.find_symbol("end").address == 4
        assert_equivalent(doc, state)


class TestReassembleLine:
    def test_word_overwritten_in_place(self):
        src = "addi x1, x2, -12\nnop"
        doc, state, deltas = drive(src, [InsertChar(0, 16, "1")])
        assert doc.lines[0] == "addi x1, x2, -121"
        assert state.lines[0].instruction == 0xF8710093
        assert state.image.read_word(0) == 0xF8710093
        assert state.lines[1].address == 4
        assert deltas[0][1].image_changed is True
        assert_equivalent(doc, state)

    def test_still_invalid_keeps_placeholder(self):
        src = "junk\nnop"
        doc, state, _ = drive(src, [InsertChar(0, 4, "x")])
        assert state.lines[0].error
        assert state.image.read_word(0) == PLACEHOLDER_WORD
        assert_equivalent(doc, state)

    def test_retarget_keeps_stale_reference(self):
        src = "a:\nb2:\nbne x1, x0, b2"
        doc, state, _ = drive(src, [InsertChar(2, 12, "a")])
        assert doc.lines[2] == "bne x1, x0, ab2"
        # old symbol keeps the now-stale reference
        b2 = state.find_symbol("b2")
        assert len(b2.references) == 1
        assert state.reference_is_stale(b2, b2.references[0])
        ab2 = state.find_symbol("ab2")
        assert ab2.declaration_line is None
        assert state.lines[2].error    # ab2 undefined
        assert_equivalent(doc, state)

    def test_comment_edit_no_image_effect(self):
        src = "# note\nnop"
        doc, state, deltas = drive(src, [InsertChar(0, 6, "!")])
        assert deltas[0][1].image_changed is False
        assert_equivalent(doc, state)

    def test_whitespace_into_empty_line(self):
        src = "nop\n\nnop"
        doc, state, deltas = drive(src, [InsertChar(1, 0, " ")])
        assert deltas[0][0].tag == LINE_CHANGE
        assert len(state.image.text) == 8
        assert_equivalent(doc, state)


class TestFullFallback:
    def test_delete_range(self):
        src = "nop\naddi x1, x2, 3\nnop"
        doc, state, deltas = drive(src, [DeleteRange(0, 0, 1, 5)])
        assert deltas[0][1].full_reassembly
        assert_equivalent(doc, state)

    def test_paste(self):
        doc, state, _ = drive("nop", [Paste(0, 0, "loop:\nj loop\n")])
        assert state.find_symbol("loop").address == 0
        assert_equivalent(doc, state)

    def test_colon_creates_label(self):
        src = "loop\nj loop"
        doc, state, deltas = drive(src, [InsertChar(0, 4, ":")])
        assert deltas[0][1].full_reassembly
        assert state.find_symbol("loop").address == 0
        assert not state.lines[1].error
        assert_equivalent(doc, state)

    def test_midline_split(self):
        src = "addi x1, x2, 3"
        doc, state, _ = drive(src, [InsertNewline(0, 4)])
        assert doc.lines == ["addi", " x1, x2, 3"]
        assert len(state.image.text) == 8
        assert_equivalent(doc, state)


class TestCounters:
    def test_line_change_touches_one_line(self):
        src = "\n".join(["nop"] * 50 + ["addi x1, x2, 3"])
        doc = Document(src)
        state = assemble_full(src)
        state.counters.reset()
        apply_edit(state, doc, InsertChar(50, 13, "1"))
        assert state.counters.lines_assembled == 1

    def test_line_change_symbol_scan_independent_of_n(self):
        def scans(n):
            src = "x:\nnop\n" + "\n".join(["nop"] * n) + "\nbne x1, x0, x"
            state = assemble_full(src)
            doc = Document(src)
            last = len(doc.lines) - 1
            state.counters.reset()
            apply_edit(state, doc, InsertChar(last, 4, " "))
            return state.counters.symbols_scanned
        assert scans(100) == scans(1000)

    def test_insert_byte_shift_scales_with_n(self):
        def moved(n):
            src = "\n".join(["nop"] * n)
            state = assemble_full(src)
            doc = Document(src)
            apply_edit(state, doc, InsertNewline(0, 0))
            state.counters.reset()
            apply_edit(state, doc, InsertChar(0, 0, "n"))
            return state.counters.bytes_moved
        assert moved(400) == 4 * 400
        assert moved(100) == 4 * 100

    def test_full_mode_assembles_every_line(self):
        src = "\n".join(["nop", "", "# c", "x:", ".word 1", "beq x0, x0, x"])
        state = assemble_full(src)
        assert state.counters.lines_assembled == 6


class TestEventSerialization:
    @pytest.mark.parametrize("event", [
        InsertChar(3, 7, "x"),
        InsertNewline(0, 0),
        DeleteRange(1, 0, 2, 4),
        Paste(0, 0, "a\nb"),
    ])
    def test_round_trip(self, event):
        assert event_from_json(event_to_json(event)) == event

    def test_unknown_op_rejected(self):
        with pytest.raises(ValueError):
            event_from_json({"op": "teleport"})

    def test_trace_file_round_trip(self, tmp_path):
        from rvstudio.incremental import load_trace, save_trace
        events = [InsertNewline(0, 3), InsertChar(1, 0, "n"),
                  Paste(0, 0, "a\nb"), DeleteRange(0, 0, 1, 1)]
        path = tmp_path / "trace.ndjson"
        save_trace(str(path), events)
        assert load_trace(str(path)) == events
        # one JSON object per line
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 4
        assert json.loads(lines[0]) == {"op": "insert_newline",
                                        "line": 0, "col": 3}


class TestImageShiftLocality:
    def test_change_keeps_length_insert_adds_one_word(self):
        for seed in range(50):
            source, events = random_trace(seed + 9000, max_lines=40,
                                          max_events=30)
            doc = Document(source)
            state = assemble_full(source)
            for event in events:
                before = len(state.image.text)
                state, cls, _ = apply_edit(state, doc, event)
                after = len(state.image.text)
                if cls.tag == LINE_CHANGE:
                    assert after == before
                elif cls.tag == LINE_INSERT:
                    assert after == before + 4
                elif cls.tag == EMPTY_LINE_INSERT:
                    assert after == before


class TestRandomizedEquivalence:
    """Small, fast version; the acceptance suite runs the full 1000 seeds."""

    def test_final_state_equivalence(self):
        for seed in range(120):
            source, events = random_trace(seed, max_lines=60, max_events=50)
            doc = Document(source)
            state = assemble_full(source)
            for event in events:
                state, _, _ = apply_edit(state, doc, event)
            oracle = assemble_full(doc.text())
            assert state.projection() == oracle.projection(), f"seed {seed}"

    def test_equivalence_after_every_event(self):
        for seed in range(40):
            source, events = random_trace(seed + 5000, max_lines=30,
                                          max_events=30)
            doc = Document(source)
            state = assemble_full(source)
            for i, event in enumerate(events):
                state, _, _ = apply_edit(state, doc, event)
                oracle = assemble_full(doc.text())
                assert state.projection() == oracle.projection(), \
                    f"seed {seed} event {i}: {event}"
