"""RV32IM instruction set: encoding tables, bit-exact encode/decode, pseudo expansion.

The six base formats (R, I, S, B, U, J) follow the standard RISC-V layout.
Shift-immediate instructions (slli/srli/srai) are carried as R-format here:
their top seven bits behave exactly like funct7 and the shift amount sits in
the rs2 slot, which keeps funct3/funct7 presence a pure function of format.
"""

from __future__ import annotations

from dataclasses import dataclass, field

WORD_MASK = 0xFFFFFFFF

OP_ALU = 0b0110011
OP_ALU_IMM = 0b0010011
OP_LOAD = 0b0000011
OP_STORE = 0b0100011
OP_BRANCH = 0b1100011
OP_LUI = 0b0110111
OP_AUIPC = 0b0010111
OP_JAL = 0b1101111
OP_JALR = 0b1100111
OP_SYSTEM = 0b1110011

ECALL_WORD = 0x00000073

# Immediate ranges, inclusive, after sign extension.
I_IMM_MIN, I_IMM_MAX = -2048, 2047
B_IMM_MIN, B_IMM_MAX = -4096, 4094
U_IMM_MAX = 0xFFFFF
J_IMM_MIN, J_IMM_MAX = -1048576, 1048574

ABI_REGISTER_NAMES = {
    "zero": 0, "ra": 1, "sp": 2, "gp": 3, "tp": 4,
    "t0": 5, "t1": 6, "t2": 7, "s0": 8, "s1": 9,
    "a0": 10, "a1": 11, "a2": 12, "a3": 13, "a4": 14, "a5": 15,
    "a6": 16, "a7": 17,
    "s2": 18, "s3": 19, "s4": 20, "s5": 21, "s6": 22, "s7": 23,
    "s8": 24, "s9": 25, "s10": 26, "s11": 27,
    "t3": 28, "t4": 29, "t5": 30, "t6": 31,
}


def sign_extend(value: int, bits: int) -> int:
    """Interpret the low `bits` of value as a two's-complement integer."""
    value &= (1 << bits) - 1
    if value & (1 << (bits - 1)):
        value -= 1 << bits
    return value


def to_unsigned(value: int) -> int:
    return value & WORD_MASK


def to_signed(value: int) -> int:
    return sign_extend(value, 32)


class EncodeError(ValueError):
    """Raised when a parsed instruction cannot be encoded."""

    code = "encode-error"

    def __init__(self, message: str, span: tuple[int, int] = (0, 0)):
        super().__init__(message)
        self.span = span


class UnknownMnemonic(EncodeError):
    code = "unknown-mnemonic"


class OperandArity(EncodeError):
    code = "operand-arity"


class ImmediateOutOfRange(EncodeError):
    code = "immediate-out-of-range"


class BranchOffsetOutOfRange(ImmediateOutOfRange):
    code = "branch-offset-out-of-range"


class RegisterOutOfRange(EncodeError):
    code = "register-out-of-range"


class NotAPseudo(EncodeError):
    code = "not-a-pseudo"


class Undecodable(ValueError):
    """Raised by bitfields() for words that do not decode."""


@dataclass(frozen=True)
class InstructionSpec:
    """One row of the instruction table."""

    mnemonic: str
    format: str                     # R, I, S, B, U, J
    opcode: int
    funct3: int | None = None
    funct7: int | None = None
    operands: tuple[str, ...] = ()  # schema slot names, see OPERAND_KINDS


# Operand schema slots and what they accept:
#   rd/rs1/rs2 -- register
#   imm        -- 12-bit signed immediate
#   shamt      -- shift amount 0..31 (encoded in the rs2 slot)
#   imm20      -- 20-bit upper immediate, 0..0xFFFFF
#   mem        -- imm(rs1) addressing operand
#   target     -- label or absolute address (B/J pc-relative encoding)
OPERAND_KINDS = ("rd", "rs1", "rs2", "imm", "shamt", "imm20", "mem", "target")


def _r(m, f3, f7, ops=("rd", "rs1", "rs2")):
    return InstructionSpec(m, "R", OP_ALU, f3, f7, ops)


INSTRUCTION_TABLE: dict[str, InstructionSpec] = {}
for spec in [
    _r("add", 0b000, 0b0000000),
    _r("sub", 0b000, 0b0100000),
    _r("sll", 0b001, 0b0000000),
    _r("slt", 0b010, 0b0000000),
    _r("sltu", 0b011, 0b0000000),
    _r("xor", 0b100, 0b0000000),
    _r("srl", 0b101, 0b0000000),
    _r("sra", 0b101, 0b0100000),
    _r("or", 0b110, 0b0000000),
    _r("and", 0b111, 0b0000000),
    _r("mul", 0b000, 0b0000001),
    _r("mulh", 0b001, 0b0000001),
    _r("mulhsu", 0b010, 0b0000001),
    _r("mulhu", 0b011, 0b0000001),
    _r("div", 0b100, 0b0000001),
    _r("divu", 0b101, 0b0000001),
    _r("rem", 0b110, 0b0000001),
    _r("remu", 0b111, 0b0000001),
    InstructionSpec("slli", "R", OP_ALU_IMM, 0b001, 0b0000000, ("rd", "rs1", "shamt")),
    InstructionSpec("srli", "R", OP_ALU_IMM, 0b101, 0b0000000, ("rd", "rs1", "shamt")),
    InstructionSpec("srai", "R", OP_ALU_IMM, 0b101, 0b0100000, ("rd", "rs1", "shamt")),
    InstructionSpec("addi", "I", OP_ALU_IMM, 0b000, None, ("rd", "rs1", "imm")),
    InstructionSpec("slti", "I", OP_ALU_IMM, 0b010, None, ("rd", "rs1", "imm")),
    InstructionSpec("sltiu", "I", OP_ALU_IMM, 0b011, None, ("rd", "rs1", "imm")),
    InstructionSpec("xori", "I", OP_ALU_IMM, 0b100, None, ("rd", "rs1", "imm")),
    InstructionSpec("ori", "I", OP_ALU_IMM, 0b110, None, ("rd", "rs1", "imm")),
    InstructionSpec("andi", "I", OP_ALU_IMM, 0b111, None, ("rd", "rs1", "imm")),
    InstructionSpec("lb", "I", OP_LOAD, 0b000, None, ("rd", "mem")),
    InstructionSpec("lh", "I", OP_LOAD, 0b001, None, ("rd", "mem")),
    InstructionSpec("lw", "I", OP_LOAD, 0b010, None, ("rd", "mem")),
    InstructionSpec("lbu", "I", OP_LOAD, 0b100, None, ("rd", "mem")),
    InstructionSpec("lhu", "I", OP_LOAD, 0b101, None, ("rd", "mem")),
    InstructionSpec("jalr", "I", OP_JALR, 0b000, None, ("rd", "mem")),
    InstructionSpec("sb", "S", OP_STORE, 0b000, None, ("rs2", "mem")),
    InstructionSpec("sh", "S", OP_STORE, 0b001, None, ("rs2", "mem")),
    InstructionSpec("sw", "S", OP_STORE, 0b010, None, ("rs2", "mem")),
    InstructionSpec("beq", "B", OP_BRANCH, 0b000, None, ("rs1", "rs2", "target")),
    InstructionSpec("bne", "B", OP_BRANCH, 0b001, None, ("rs1", "rs2", "target")),
    InstructionSpec("blt", "B", OP_BRANCH, 0b100, None, ("rs1", "rs2", "target")),
    InstructionSpec("bge", "B", OP_BRANCH, 0b101, None, ("rs1", "rs2", "target")),
    InstructionSpec("bltu", "B", OP_BRANCH, 0b110, None, ("rs1", "rs2", "target")),
    InstructionSpec("bgeu", "B", OP_BRANCH, 0b111, None, ("rs1", "rs2", "target")),
    InstructionSpec("lui", "U", OP_LUI, None, None, ("rd", "imm20")),
    InstructionSpec("auipc", "U", OP_AUIPC, None, None, ("rd", "imm20")),
    InstructionSpec("jal", "J", OP_JAL, None, None, ("rd", "target")),
    InstructionSpec("ecall", "I", OP_SYSTEM, 0b000, None, ()),
]:
    INSTRUCTION_TABLE[spec.mnemonic] = spec

# Pseudoinstruction operand schemas.  Every expansion is a single base
# instruction so each non-empty instruction line still owns one word.
PSEUDO_SCHEMAS: dict[str, tuple[str, ...]] = {
    "mv": ("rd", "rs1"),
    "li": ("rd", "imm"),
    "j": ("target",),
    "nop": (),
    "ret": (),
    "beqz": ("rs1", "target"),
    "bnez": ("rs1", "target"),
}

META_MNEMONICS = frozenset({"ecall"})


@dataclass(frozen=True)
class Operand:
    kind: str                       # "reg" | "imm" | "sym" | "mem"
    value: int | str
    base: int | None = None        # base register for "mem"
    span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class ParsedInstruction:
    mnemonic: str
    operands: tuple[Operand, ...]
    mnemonic_span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class DecodedInstruction:
    mnemonic: str
    format: str
    raw_word: int
    rd: int | None = None
    rs1: int | None = None
    rs2: int | None = None
    immediate: int | None = None


@dataclass(frozen=True)
class FieldSlice:
    name: str
    high_bit: int
    low_bit: int
    value: int


def _bits(word: int, high: int, low: int) -> int:
    return (word >> low) & ((1 << (high - low + 1)) - 1)


def _check_reg(op: Operand) -> int:
    if op.kind != "reg":
        raise OperandArity(f"expected a register, got {op.kind}", op.span)
    reg = int(op.value)
    if not 0 <= reg <= 31:
        raise RegisterOutOfRange(f"register index {reg} out of range", op.span)
    return reg


def _check_imm(op: Operand, lo: int, hi: int, even: bool = False) -> int:
    if op.kind != "imm":
        raise OperandArity(f"expected an immediate, got {op.kind}", op.span)
    value = int(op.value)
    if not lo <= value <= hi:
        raise ImmediateOutOfRange(
            f"immediate {value} outside [{lo}, {hi}]", op.span)
    if even and value % 2:
        raise ImmediateOutOfRange(f"immediate {value} must be even", op.span)
    return value


def encode_fields(mnemonic: str, rd: int = 0, rs1: int = 0, rs2: int = 0,
                  imm: int = 0) -> int:
    """Pack already-validated field values into an instruction word.

    For B/J formats `imm` is the pc-relative byte offset; for U it is the
    raw 20-bit upper field; for R-format shifts it is the shift amount.
    Raises ImmediateOutOfRange / RegisterOutOfRange on bad values.
    """
    spec = INSTRUCTION_TABLE.get(mnemonic)
    if spec is None:
        raise UnknownMnemonic(f"unknown mnemonic '{mnemonic}'")
    for reg in (rd, rs1, rs2):
        if not 0 <= reg <= 31:
            raise RegisterOutOfRange(f"register index {reg} out of range")
    f = spec.format
    if f == "R":
        if "shamt" in spec.operands:
            if not 0 <= imm <= 31:
                raise ImmediateOutOfRange(f"shift amount {imm} outside [0, 31]")
            rs2 = imm
        return (spec.funct7 << 25 | rs2 << 20 | rs1 << 15
                | spec.funct3 << 12 | rd << 7 | spec.opcode)
    if f == "I":
        if not I_IMM_MIN <= imm <= I_IMM_MAX:
            raise ImmediateOutOfRange(
                f"immediate {imm} outside [{I_IMM_MIN}, {I_IMM_MAX}]")
        return ((imm & 0xFFF) << 20 | rs1 << 15
                | spec.funct3 << 12 | rd << 7 | spec.opcode)
    if f == "S":
        if not I_IMM_MIN <= imm <= I_IMM_MAX:
            raise ImmediateOutOfRange(
                f"immediate {imm} outside [{I_IMM_MIN}, {I_IMM_MAX}]")
        imm &= 0xFFF
        return ((imm >> 5) << 25 | rs2 << 20 | rs1 << 15
                | spec.funct3 << 12 | (imm & 0x1F) << 7 | spec.opcode)
    if f == "B":
        if not B_IMM_MIN <= imm <= B_IMM_MAX or imm % 2:
            raise BranchOffsetOutOfRange(
                f"branch offset {imm} outside even [{B_IMM_MIN}, {B_IMM_MAX}]")
        imm &= 0x1FFF
        return ((imm >> 12 & 1) << 31 | (imm >> 5 & 0x3F) << 25
                | rs2 << 20 | rs1 << 15 | spec.funct3 << 12
                | (imm >> 1 & 0xF) << 8 | (imm >> 11 & 1) << 7 | spec.opcode)
    if f == "U":
        if not 0 <= imm <= U_IMM_MAX:
            raise ImmediateOutOfRange(
                f"upper immediate {imm} outside [0, {U_IMM_MAX}]")
        return imm << 12 | rd << 7 | spec.opcode
    if f == "J":
        if not J_IMM_MIN <= imm <= J_IMM_MAX or imm % 2:
            raise BranchOffsetOutOfRange(
                f"jump offset {imm} outside even [{J_IMM_MIN}, {J_IMM_MAX}]")
        imm &= 0x1FFFFF
        return ((imm >> 20 & 1) << 31 | (imm >> 1 & 0x3FF) << 21
                | (imm >> 11 & 1) << 20 | (imm >> 12 & 0xFF) << 12
                | rd << 7 | spec.opcode)
    raise AssertionError(f"unhandled format {f}")


def encode(parsed: ParsedInstruction, address: int = 0) -> int:
    """Encode a parsed base instruction into its 32-bit word.

    `address` is the instruction's own byte address, used to turn absolute
    `target` operands into pc-relative offsets.  Symbolic targets must be
    resolved to absolute addresses before calling.
    """
    spec = INSTRUCTION_TABLE.get(parsed.mnemonic)
    if spec is None:
        raise UnknownMnemonic(f"unknown mnemonic '{parsed.mnemonic}'",
                              parsed.mnemonic_span)
    if len(parsed.operands) != len(spec.operands):
        raise OperandArity(
            f"{parsed.mnemonic} takes {len(spec.operands)} operands, "
            f"got {len(parsed.operands)}", parsed.mnemonic_span)
    rd = rs1 = rs2 = 0
    imm = 0
    for slot, op in zip(spec.operands, parsed.operands):
        if slot == "rd":
            rd = _check_reg(op)
        elif slot == "rs1":
            rs1 = _check_reg(op)
        elif slot == "rs2":
            rs2 = _check_reg(op)
        elif slot == "imm":
            imm = _check_imm(op, I_IMM_MIN, I_IMM_MAX)
        elif slot == "shamt":
            imm = _check_imm(op, 0, 31)
        elif slot == "imm20":
            imm = _check_imm(op, 0, U_IMM_MAX)
        elif slot == "mem":
            if op.kind != "mem":
                raise OperandArity("expected imm(reg) operand", op.span)
            imm = int(op.value)
            if not I_IMM_MIN <= imm <= I_IMM_MAX:
                raise ImmediateOutOfRange(
                    f"offset {imm} outside [{I_IMM_MIN}, {I_IMM_MAX}]", op.span)
            rs1 = op.base
        elif slot == "target":
            if op.kind == "sym":
                raise OperandArity(
                    f"unresolved symbol '{op.value}'", op.span)
            target = to_unsigned(int(op.value))
            offset = to_signed(target - address)
            lo, hi = (B_IMM_MIN, B_IMM_MAX) if spec.format == "B" \
                else (J_IMM_MIN, J_IMM_MAX)
            if not lo <= offset <= hi or offset % 2:
                raise BranchOffsetOutOfRange(
                    f"branch target 0x{target:x} is {offset} bytes away, "
                    f"outside even [{lo}, {hi}]", op.span)
            imm = offset
    return encode_fields(parsed.mnemonic, rd, rs1, rs2, imm)


_DECODE_INDEX: dict[tuple[int, int | None, int | None], InstructionSpec] = {}
for spec in INSTRUCTION_TABLE.values():
    _DECODE_INDEX[(spec.opcode, spec.funct3, spec.funct7)] = spec


def decode(word: int) -> DecodedInstruction | None:
    """Decode a 32-bit word; None for anything that is not a supported
    encoding (including the all-zero placeholder)."""
    word &= WORD_MASK
    opcode = word & 0x7F
    funct3 = _bits(word, 14, 12)
    funct7 = _bits(word, 31, 25)
    rd = _bits(word, 11, 7)
    rs1 = _bits(word, 19, 15)
    rs2 = _bits(word, 24, 20)

    if opcode == OP_ALU:
        spec = _DECODE_INDEX.get((opcode, funct3, funct7))
        if spec is None:
            return None
        return DecodedInstruction(spec.mnemonic, "R", word, rd=rd, rs1=rs1, rs2=rs2)
    if opcode == OP_ALU_IMM:
        if funct3 in (0b001, 0b101):  # shifts carry funct7
            spec = _DECODE_INDEX.get((opcode, funct3, funct7))
            if spec is None:
                return None
            return DecodedInstruction(spec.mnemonic, "R", word,
                                      rd=rd, rs1=rs1, rs2=rs2)
        spec = _DECODE_INDEX.get((opcode, funct3, None))
        if spec is None:
            return None
        return DecodedInstruction(spec.mnemonic, "I", word, rd=rd, rs1=rs1,
                                  immediate=sign_extend(word >> 20, 12))
    if opcode in (OP_LOAD, OP_JALR):
        spec = _DECODE_INDEX.get((opcode, funct3, None))
        if spec is None:
            return None
        return DecodedInstruction(spec.mnemonic, "I", word, rd=rd, rs1=rs1,
                                  immediate=sign_extend(word >> 20, 12))
    if opcode == OP_STORE:
        spec = _DECODE_INDEX.get((opcode, funct3, None))
        if spec is None:
            return None
        imm = sign_extend((funct7 << 5) | rd, 12)
        return DecodedInstruction(spec.mnemonic, "S", word, rs1=rs1, rs2=rs2,
                                  immediate=imm)
    if opcode == OP_BRANCH:
        spec = _DECODE_INDEX.get((opcode, funct3, None))
        if spec is None:
            return None
        imm = sign_extend((word >> 31 & 1) << 12 | (word >> 7 & 1) << 11
                          | (word >> 25 & 0x3F) << 5 | (word >> 8 & 0xF) << 1, 13)
        return DecodedInstruction(spec.mnemonic, "B", word, rs1=rs1, rs2=rs2,
                                  immediate=imm)
    if opcode in (OP_LUI, OP_AUIPC):
        mnemonic = "lui" if opcode == OP_LUI else "auipc"
        return DecodedInstruction(mnemonic, "U", word, rd=rd,
                                  immediate=word >> 12 & 0xFFFFF)
    if opcode == OP_JAL:
        imm = sign_extend((word >> 31 & 1) << 20 | (word >> 12 & 0xFF) << 12
                          | (word >> 20 & 1) << 11 | (word >> 21 & 0x3FF) << 1, 21)
        return DecodedInstruction("jal", "J", word, rd=rd, immediate=imm)
    if opcode == OP_SYSTEM:
        if word == ECALL_WORD:
            return DecodedInstruction("ecall", "I", word, rd=0, rs1=0, immediate=0)
        return None
    return None


def reencode(decoded: DecodedInstruction) -> int:
    """Inverse of decode; reproduces the original word bit-exactly."""
    spec = INSTRUCTION_TABLE[decoded.mnemonic]
    if spec.format == "R":
        return encode_fields(decoded.mnemonic, decoded.rd or 0,
                             decoded.rs1 or 0, decoded.rs2 or 0,
                             imm=decoded.rs2 or 0)
    return encode_fields(decoded.mnemonic, decoded.rd or 0, decoded.rs1 or 0,
                         decoded.rs2 or 0, decoded.immediate or 0)


def expand_pseudo(parsed: ParsedInstruction) -> list[ParsedInstruction]:
    """Expand a pseudoinstruction into its (single) base instruction."""
    ops = parsed.operands
    m = parsed.mnemonic
    if m not in PSEUDO_SCHEMAS:
        raise NotAPseudo(f"'{m}' is not a pseudoinstruction",
                         parsed.mnemonic_span)
    schema = PSEUDO_SCHEMAS[m]
    if len(ops) != len(schema):
        raise OperandArity(f"{m} takes {len(schema)} operands, got {len(ops)}",
                           parsed.mnemonic_span)
    span = parsed.mnemonic_span
    zero = Operand("reg", 0, span=span)
    if m == "mv":
        return [ParsedInstruction("addi", (ops[0], ops[1],
                                           Operand("imm", 0, span=span)), span)]
    if m == "li":
        imm = _check_imm(ops[1], I_IMM_MIN, I_IMM_MAX)
        return [ParsedInstruction("addi", (ops[0], zero,
                                           Operand("imm", imm, span=ops[1].span)),
                                  span)]
    if m == "j":
        return [ParsedInstruction("jal", (zero, ops[0]), span)]
    if m == "nop":
        return [ParsedInstruction("addi", (zero, zero,
                                           Operand("imm", 0, span=span)), span)]
    if m == "ret":
        return [ParsedInstruction("jalr", (zero,
                                           Operand("mem", 0, base=1, span=span)),
                                  span)]
    if m == "beqz":
        return [ParsedInstruction("beq", (ops[0], zero, ops[1]), span)]
    if m == "bnez":
        return [ParsedInstruction("bne", (ops[0], zero, ops[1]), span)]
    raise AssertionError(m)


def bitfields(word: int) -> list[FieldSlice]:
    """Contiguous, non-overlapping named slices covering bits 31..0."""
    decoded = decode(word)
    if decoded is None:
        raise Undecodable(f"0x{word & WORD_MASK:08X} does not decode")
    spec = INSTRUCTION_TABLE[decoded.mnemonic]
    shamt = "shamt" in spec.operands

    def s(name, high, low):
        return FieldSlice(name, high, low, _bits(word, high, low))

    f = decoded.format
    if f == "R":
        return [s("funct7", 31, 25), s("shamt" if shamt else "rs2", 24, 20),
                s("rs1", 19, 15), s("funct3", 14, 12), s("rd", 11, 7),
                s("opcode", 6, 0)]
    if f == "I":
        return [s("imm[11:0]", 31, 20), s("rs1", 19, 15), s("funct3", 14, 12),
                s("rd", 11, 7), s("opcode", 6, 0)]
    if f == "S":
        return [s("imm[11:5]", 31, 25), s("rs2", 24, 20), s("rs1", 19, 15),
                s("funct3", 14, 12), s("imm[4:0]", 11, 7), s("opcode", 6, 0)]
    if f == "B":
        return [s("imm[12|10:5]", 31, 25), s("rs2", 24, 20), s("rs1", 19, 15),
                s("funct3", 14, 12), s("imm[4:1|11]", 11, 7), s("opcode", 6, 0)]
    if f == "U":
        return [s("imm[31:12]", 31, 12), s("rd", 11, 7), s("opcode", 6, 0)]
    if f == "J":
        return [s("imm[20|10:1|11|19:12]", 31, 12), s("rd", 11, 7),
                s("opcode", 6, 0)]
    raise AssertionError(f)


def split_immediate(format: str, word: int) -> tuple[int | None, int | None]:
    """The format-dependent raw immediate pieces as stored in the word:
    (high-anchored piece, low-anchored piece)."""
    if format == "I":
        return _bits(word, 31, 20), None
    if format == "S" or format == "B":
        return _bits(word, 31, 25), _bits(word, 11, 7)
    if format == "U" or format == "J":
        return _bits(word, 31, 12), None
    return None, None
