"""RV32IM execution: fetch-decode-execute with change tracking.

Memory is sparse (4 KiB pages allocated on first touch) across three legal
windows: text, data, and stack.  Reads of untouched bytes inside a window
return 0, so running past the last text word fetches the 0x00000000
placeholder and faults as an illegal instruction.  Misaligned accesses
fault; there is no silent support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .isa import decode, sign_extend, to_signed, to_unsigned
from .model import (
    DATA_BASE,
    STACK_BASE,
    STACK_INIT,
    STACK_TOP,
    TEXT_BASE,
    MachineImage,
)

PAGE_SIZE = 4096
PAGE_MASK = PAGE_SIZE - 1

# Fault identifiers (machine-readable).
ILLEGAL_INSTRUCTION = "illegal-instruction"
MISALIGNED_FETCH = "misaligned-fetch"
MISALIGNED_ACCESS = "misaligned-access"
MEMORY_OUT_OF_RANGE = "memory-out-of-range"
UNKNOWN_SERVICE = "unknown-service"

# ecall service codes, selected by a7.
SVC_PRINT_INT = 1
SVC_PRINT_STRING = 4
SVC_READ_INT = 5
SVC_EXIT = 10

INT_MIN32 = -(1 << 31)


class AlreadyHalted(RuntimeError):
    pass


@dataclass
class IoHooks:
    """Console bindings for the input/output/stop services."""

    read_integer: Callable[[], int] = lambda: 0
    write_text: Callable[[str], None] = lambda text: None


@dataclass
class ChangeSet:
    """Exactly what the last executed instruction wrote."""

    registers_written: set[int] = field(default_factory=set)
    memory_bytes_written: set[int] = field(default_factory=set)
    pc_before: int = 0
    pc_after: int = 0

    def to_json(self) -> dict:
        return {"registers": sorted(self.registers_written),
                "memory": sorted(self.memory_bytes_written),
                "pc_before": self.pc_before, "pc_after": self.pc_after}


@dataclass
class StopReason:
    kind: str                      # "halted" | "step-limit" | "fault"
    fault: str | None = None
    steps: int = 0

    def to_json(self) -> dict:
        return {"kind": self.kind, "fault": self.fault, "steps": self.steps}


class SparseMemory:
    """Byte-addressable sparse memory with legality windows."""

    WINDOWS = ((TEXT_BASE, DATA_BASE), (DATA_BASE, DATA_BASE + 0x1000_0000),
               (STACK_BASE, STACK_TOP))

    def __init__(self) -> None:
        self.pages: dict[int, bytearray] = {}

    def in_range(self, address: int, size: int = 1) -> bool:
        address = to_unsigned(address)
        return any(lo <= address and address + size <= hi
                   for lo, hi in self.WINDOWS)

    def _page(self, address: int) -> bytearray:
        base = address & ~PAGE_MASK
        page = self.pages.get(base)
        if page is None:
            page = self.pages[base] = bytearray(PAGE_SIZE)
        return page

    def load(self, address: int, size: int) -> int:
        address = to_unsigned(address)
        value = 0
        for i in range(size):
            a = address + i
            page = self.pages.get(a & ~PAGE_MASK)
            byte = page[a & PAGE_MASK] if page is not None else 0
            value |= byte << (8 * i)
        return value

    def store(self, address: int, value: int, size: int) -> None:
        address = to_unsigned(address)
        for i in range(size):
            a = address + i
            self._page(a)[a & PAGE_MASK] = (value >> (8 * i)) & 0xFF

    def seed(self, base: int, blob: bytes) -> None:
        for i, byte in enumerate(blob):
            a = base + i
            self._page(a)[a & PAGE_MASK] = byte


@dataclass
class MachineState:
    regs: list[int] = field(default_factory=lambda: [0] * 32)
    pc: int = TEXT_BASE
    memory: SparseMemory = field(default_factory=SparseMemory)
    halted: bool = False
    fault: str | None = None
    steps_executed: int = 0
    text_length: int = 0

    def read_reg(self, index: int) -> int:
        return self.regs[index]

    def write_reg(self, index: int, value: int) -> bool:
        """x0 is hardwired to zero; returns whether a write landed."""
        if index == 0:
            return False
        self.regs[index] = to_unsigned(value)
        return True


def reset(image: MachineImage) -> MachineState:
    """Fresh machine seeded from the image; sp points into the stack."""
    state = MachineState()
    state.memory.seed(image.text_base, bytes(image.text))
    state.memory.seed(image.data_base, bytes(image.data))
    state.text_length = len(image.text)
    state.regs[2] = STACK_INIT
    return state


def _fault(state: MachineState, kind: str) -> None:
    state.halted = True
    state.fault = kind


def _read_cstring(state: MachineState, address: int, limit: int = 65536) -> str:
    out = bytearray()
    for i in range(limit):
        if not state.memory.in_range(address + i):
            break
        byte = state.memory.load(address + i, 1)
        if byte == 0:
            break
        out.append(byte)
    return out.decode("utf-8", errors="replace")


def _ecall(state: MachineState, hooks: IoHooks, changes: ChangeSet) -> None:
    service = state.regs[17]  # a7
    if service == SVC_PRINT_INT:
        hooks.write_text(str(to_signed(state.regs[10])))
    elif service == SVC_PRINT_STRING:
        hooks.write_text(_read_cstring(state, state.regs[10]))
    elif service == SVC_READ_INT:
        if state.write_reg(10, to_unsigned(int(hooks.read_integer()))):
            changes.registers_written.add(10)
    elif service == SVC_EXIT:
        state.halted = True
    else:
        _fault(state, UNKNOWN_SERVICE)


def step(state: MachineState, hooks: IoHooks | None = None) -> ChangeSet:
    """Execute one instruction; faults halt the machine with a reason."""
    if state.halted:
        raise AlreadyHalted(f"machine is halted (fault={state.fault})")
    hooks = hooks or IoHooks()
    changes = ChangeSet(pc_before=state.pc, pc_after=state.pc)

    if state.pc % 4:
        _fault(state, MISALIGNED_FETCH)
        return changes
    if not state.memory.in_range(state.pc, 4):
        _fault(state, MEMORY_OUT_OF_RANGE)
        return changes
    word = state.memory.load(state.pc, 4)
    decoded = decode(word)
    if decoded is None:
        _fault(state, ILLEGAL_INSTRUCTION)
        return changes

    regs = state.regs
    pc = state.pc
    next_pc = pc + 4
    m = decoded.mnemonic
    rd = decoded.rd
    rs1v = regs[decoded.rs1] if decoded.rs1 is not None else 0
    rs2v = regs[decoded.rs2] if decoded.rs2 is not None else 0
    imm = decoded.immediate
    result = None

    if m == "ecall":
        _ecall(state, hooks, changes)
        if state.fault is not None:
            return changes
        if state.halted:  # stop service; pc stays at the ecall
            state.steps_executed += 1
            return changes
    elif decoded.format == "R" and decoded.raw_word & 0x7F == 0x13:
        shamt = decoded.rs2
        if m == "slli":
            result = rs1v << shamt
        elif m == "srli":
            result = rs1v >> shamt
        else:  # srai
            result = to_signed(rs1v) >> shamt
    elif m in ("add", "addi"):
        result = rs1v + (imm if m == "addi" else rs2v)
    elif m == "sub":
        result = rs1v - rs2v
    elif m in ("xor", "xori"):
        result = rs1v ^ (to_unsigned(imm) if m == "xori" else rs2v)
    elif m in ("or", "ori"):
        result = rs1v | (to_unsigned(imm) if m == "ori" else rs2v)
    elif m in ("and", "andi"):
        result = rs1v & (to_unsigned(imm) if m == "andi" else rs2v)
    elif m == "sll":
        result = rs1v << (rs2v & 31)
    elif m == "srl":
        result = rs1v >> (rs2v & 31)
    elif m == "sra":
        result = to_signed(rs1v) >> (rs2v & 31)
    elif m in ("slt", "slti"):
        rhs = imm if m == "slti" else to_signed(rs2v)
        result = 1 if to_signed(rs1v) < rhs else 0
    elif m in ("sltu", "sltiu"):
        rhs = to_unsigned(imm) if m == "sltiu" else rs2v
        result = 1 if rs1v < rhs else 0
    elif m == "lui":
        result = imm << 12
    elif m == "auipc":
        result = pc + (imm << 12)
    elif m == "jal":
        result = next_pc
        next_pc = to_unsigned(pc + imm)
    elif m == "jalr":
        result = next_pc
        next_pc = to_unsigned(rs1v + imm) & ~1
    elif decoded.format == "B":
        lhs, rhs = to_signed(rs1v), to_signed(rs2v)
        taken = {"beq": lhs == rhs, "bne": lhs != rhs,
                 "blt": lhs < rhs, "bge": lhs >= rhs,
                 "bltu": rs1v < rs2v, "bgeu": rs1v >= rs2v}[m]
        if taken:
            next_pc = to_unsigned(pc + imm)
    elif m in ("lb", "lh", "lw", "lbu", "lhu"):
        size = {"lb": 1, "lbu": 1, "lh": 2, "lhu": 2, "lw": 4}[m]
        address = to_unsigned(rs1v + imm)
        if address % size:
            _fault(state, MISALIGNED_ACCESS)
            return changes
        if not state.memory.in_range(address, size):
            _fault(state, MEMORY_OUT_OF_RANGE)
            return changes
        value = state.memory.load(address, size)
        if m in ("lb", "lh"):
            value = to_unsigned(sign_extend(value, size * 8))
        result = value
    elif m in ("sb", "sh", "sw"):
        size = {"sb": 1, "sh": 2, "sw": 4}[m]
        address = to_unsigned(rs1v + imm)
        if address % size:
            _fault(state, MISALIGNED_ACCESS)
            return changes
        if not state.memory.in_range(address, size):
            _fault(state, MEMORY_OUT_OF_RANGE)
            return changes
        state.memory.store(address, rs2v, size)
        changes.memory_bytes_written.update(range(address, address + size))
    elif m == "mul":
        result = to_signed(rs1v) * to_signed(rs2v)
    elif m == "mulh":
        result = (to_signed(rs1v) * to_signed(rs2v)) >> 32
    elif m == "mulhsu":
        result = (to_signed(rs1v) * rs2v) >> 32
    elif m == "mulhu":
        result = (rs1v * rs2v) >> 32
    elif m in ("div", "rem"):
        lhs, rhs = to_signed(rs1v), to_signed(rs2v)
        if rhs == 0:
            result = -1 if m == "div" else lhs
        elif lhs == INT_MIN32 and rhs == -1:
            result = INT_MIN32 if m == "div" else 0
        else:
            quotient = abs(lhs) // abs(rhs)  # truncate toward zero
            if (lhs < 0) != (rhs < 0):
                quotient = -quotient
            result = quotient if m == "div" else lhs - quotient * rhs
    elif m in ("divu", "remu"):
        if rs2v == 0:
            result = 0xFFFFFFFF if m == "divu" else rs1v
        else:
            result = rs1v // rs2v if m == "divu" else rs1v % rs2v

    if result is not None and rd is not None:
        if state.write_reg(rd, result):
            changes.registers_written.add(rd)
    state.pc = next_pc
    changes.pc_after = next_pc
    state.steps_executed += 1
    return changes


def run(state: MachineState, hooks: IoHooks | None = None,
        max_steps: int = 1_000_000,
        observer: Callable[[MachineState, ChangeSet], None] | None = None,
        ) -> StopReason:
    """Step until halt, fault, or the step budget runs out.  `observer`
    sees every step (this is what animation hangs off of)."""
    hooks = hooks or IoHooks()
    executed = 0
    while executed < max_steps:
        if state.halted:
            break
        changes = step(state, hooks)
        executed += 1
        if observer is not None:
            observer(state, changes)
    if state.fault is not None:
        return StopReason("fault", state.fault, executed)
    if state.halted:
        return StopReason("halted", None, executed)
    return StopReason("step-limit", None, executed)
