"""Interactive document sessions: the boundary the REPL and web UI consume.

A session owns one document plus its assembly state and, after a reset, a
machine.  Edits keep the state consistent under the configured mode; the
machine becomes stale on any edit and execution refuses to run until the
next reset.  Pane queries return JSON-serializable payloads only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from . import simulator
from .assembler import assemble_full
from .disasm import disassemble_range
from .explain import explain_double, explain_instruction, explain_signed_int
from .incremental import Delta, Document, EditEvent, apply_edit
from .isa import Undecodable
from .model import AssemblyState
from .simulator import ChangeSet, IoHooks, MachineState

MAX_QUERY_BYTES = 4096
DEFAULT_MAX_STEPS = 1_000_000

_session_ids = itertools.count(1)


class SessionError(ValueError):
    code = "session-error"


class StaleMachine(SessionError):
    code = "stale-machine"


class NoMachine(SessionError):
    code = "no-machine"


class RangeTooLarge(SessionError):
    code = "range-too-large"


class MisalignedRange(SessionError):
    code = "misaligned-range"


class UnknownPane(SessionError):
    code = "unknown-pane"


@dataclass
class Session:
    mode: str = "incremental"            # "incremental" | "full"
    id: str = field(default_factory=lambda: f"s{next(_session_ids)}")
    document: Document = field(default_factory=Document)
    state: AssemblyState = field(default_factory=AssemblyState)
    machine: MachineState | None = None
    machine_stale: bool = False
    last_changes: ChangeSet | None = None
    hooks: IoHooks = field(default_factory=IoHooks)


def create_session(initial_text: str = "",
                   mode: str = "incremental") -> Session:
    if mode not in ("incremental", "full"):
        raise SessionError(f"unknown mode '{mode}'")
    session = Session(mode=mode)
    session.document = Document(initial_text)
    session.state = assemble_full(initial_text)
    return session


def session_apply_edit(session: Session, event: EditEvent) -> Delta:
    """Route one edit through the configured engine; the machine, if any,
    is stale afterwards until the next reset."""
    if session.mode == "full":
        from .incremental import FULL, classify_edit
        cls = classify_edit(session.state, session.document, event)
        session.document.apply(event)
        old_text = bytes(session.state.image.text)
        old_data = bytes(session.state.image.data)
        session.state = assemble_full(session.document.text(),
                                      counters=session.state.counters)
        delta = Delta(FULL, cls.reason, full_reassembly=True,
                      image_changed=(
                          bytes(session.state.image.text) != old_text
                          or bytes(session.state.image.data) != old_data))
    else:
        session.state, _, delta = apply_edit(session.state, session.document,
                                             event)
    if session.machine is not None:
        session.machine_stale = True
    return delta


def session_control(session: Session, command: str,
                    max_steps: int = DEFAULT_MAX_STEPS,
                    observer: Callable[[MachineState, ChangeSet], None]
                    | None = None) -> dict:
    """reset | step | run | animate.  run and animate differ only in the
    per-step observer; pacing belongs to the client."""
    if command == "reset":
        session.machine = simulator.reset(session.state.image)
        session.machine_stale = False
        session.last_changes = None
        return {"command": "reset", "machine": _machine_summary(session)}
    if session.machine is None:
        raise NoMachine("no machine; reset first")
    if session.machine_stale:
        raise StaleMachine("program changed since reset; reset first")
    if command == "step":
        changes = simulator.step(session.machine, session.hooks)
        session.last_changes = changes
        return {"command": "step", "changes": changes.to_json(),
                "machine": _machine_summary(session)}
    if command in ("run", "animate"):
        def remember(machine: MachineState, changes: ChangeSet) -> None:
            session.last_changes = changes
            if observer is not None:
                observer(machine, changes)

        stop = simulator.run(session.machine, session.hooks,
                             max_steps=max_steps, observer=remember)
        return {"command": command, "stop": stop.to_json(),
                "machine": _machine_summary(session)}
    raise SessionError(f"unknown control command '{command}'")


def _machine_summary(session: Session) -> dict:
    machine = session.machine
    return {"pc": machine.pc, "halted": machine.halted,
            "fault": machine.fault, "steps": machine.steps_executed,
            "stale": session.machine_stale}


def _registers_payload(session: Session) -> dict:
    machine = session.machine
    changed = sorted(session.last_changes.registers_written) \
        if session.last_changes else []
    if machine is None:
        return {"registers": [0] * 32, "pc": 0, "changed": [],
                "machine": None}
    return {"registers": list(machine.regs), "pc": machine.pc,
            "changed": changed, "machine": _machine_summary(session)}


def _memory_payload(session: Session, start: int, length: int) -> dict:
    if length > MAX_QUERY_BYTES:
        raise RangeTooLarge(f"memory query capped at {MAX_QUERY_BYTES} bytes")
    if length < 0:
        raise MisalignedRange("negative length")
    machine = session.machine
    if machine is not None:
        data = bytes(machine.memory.load(start + i, 1) for i in range(length))
    else:
        image = session.state.image
        data = bytes((image.read_word(start + i) & 0xFF)
                     for i in range(length))
    changed = sorted(a for a in (session.last_changes.memory_bytes_written
                                 if session.last_changes else ())
                     if start <= a < start + length)
    return {"start": start, "bytes": data.hex(),
            "changed": changed, "from_machine": machine is not None,
            "stale": session.machine_stale}


def _disassembly_payload(session: Session, start: int, count: int) -> dict:
    if count * 4 > MAX_QUERY_BYTES:
        raise RangeTooLarge(f"disassembly query capped at "
                            f"{MAX_QUERY_BYTES // 4} words")
    if start % 4:
        raise MisalignedRange(f"0x{start:x} is not 4-aligned")
    rows = [{"address": addr, "word": f"0x{word:08X}", "text": text}
            for addr, word, text in
            disassemble_range(session.state.image, start, count)]
    pc = session.machine.pc if session.machine is not None else None
    return {"rows": rows, "pc": pc}


def _symbols_payload(session: Session) -> dict:
    state = session.state
    table = []
    for sym in state.symbols:
        refs = [{"line": r.line_number, "address": r.address,
                 "stale": state.reference_is_stale(sym, r)}
                for r in sym.references]
        if sym.declaration_line is None \
                and all(r["stale"] for r in refs):
            continue
        table.append({"label": sym.label,
                      "declaration_line": sym.declaration_line,
                      "address": sym.address, "references": refs})
    return {"symbols": table}


def _explain_payload(session: Session, request: dict) -> dict:
    what = request.get("what")
    if what == "instruction":
        if "line" in request:
            entry = session.state.lines[request["line"]]
            if entry.instruction is None:
                raise Undecodable(f"line {request['line']} has no "
                                  f"decodable instruction word")
            word = entry.instruction
        else:
            word = int(request["word"])
        return explain_instruction(word).to_json()
    if what == "int":
        return explain_signed_int(int(request["word"])).to_json()
    if what == "double":
        return explain_double(int(request["bits"])).to_json()
    raise SessionError(f"unknown explain request {what!r}")


def session_query(session: Session, pane: str, **kwargs) -> dict:
    """Pane payloads: registers, memory, disassembly, diagnostics, symbols,
    source, explain."""
    if pane == "registers":
        return _registers_payload(session)
    if pane == "memory":
        return _memory_payload(session, int(kwargs.get("start", 0)),
                               int(kwargs.get("length", 64)))
    if pane == "disassembly":
        return _disassembly_payload(session, int(kwargs.get("start", 0)),
                                    int(kwargs.get("count", 16)))
    if pane == "diagnostics":
        return {"diagnostics": [d.to_json() for d in
                                session.state.aggregated_diagnostics()]}
    if pane == "symbols":
        return _symbols_payload(session)
    if pane == "source":
        lines = [{"line": e.source_line_number, "kind": e.kind.value,
                  "address": e.address, "length": e.length,
                  "word": f"0x{e.instruction:08X}"
                  if e.instruction is not None else None,
                  "error": e.error}
                 for e in session.state.lines]
        return {"text": session.document.text(), "lines": lines,
                "mode": session.mode}
    if pane == "explain":
        return _explain_payload(session, kwargs.get("request", {}))
    raise UnknownPane(f"unknown pane '{pane}'")
