// Message and payload shapes of the session protocol (docs/protocol.md).
// The frontend computes nothing itself: it only ships these messages and
// renders what comes back.

export type EditEventMsg =
  | { op: "insert_char"; line: number; col: number; ch: string }
  | { op: "insert_newline"; line: number; col: number }
  | {
      op: "delete_range";
      start_line: number;
      start_col: number;
      end_line: number;
      end_col: number;
    }
  | { op: "paste"; line: number; col: number; text: string };

export interface Diagnostic {
  line: number;
  start: number;
  end: number;
  code: string;
  message: string;
}

export interface Delta {
  class: string;
  reason: string | null;
  full_reassembly: boolean;
  image_changed: boolean;
  changed_lines: number[];
  inserted_word_address: number | null;
  symbols_touched: string[];
}

export interface EditResult {
  delta: Delta;
  diagnostics: Diagnostic[];
}

export interface MachineSummary {
  pc: number;
  halted: boolean;
  fault: string | null;
  steps: number;
  stale: boolean;
}

export interface ChangesPayload {
  registers: number[];
  memory: number[];
  pc_before: number;
  pc_after: number;
}

export interface ControlResult {
  command?: string;
  changes?: ChangesPayload;
  stop?: { kind: string; fault?: string | null; steps?: number };
  machine?: MachineSummary;
}

export interface RegistersPayload {
  registers: number[];
  pc: number;
  changed: number[];
  machine: MachineSummary | null;
}

export interface MemoryPayload {
  start: number;
  bytes: string; // hex
  changed: number[];
  from_machine: boolean;
  stale: boolean;
}

export interface DisassemblyRow {
  address: number;
  word: string;
  text: string;
}

export interface DisassemblyPayload {
  rows: DisassemblyRow[];
  pc: number | null;
}

export interface SymbolReference {
  line: number;
  address: number;
  stale: boolean;
}

export interface SymbolRow {
  label: string;
  declaration_line: number | null;
  address: number | null;
  references: SymbolReference[];
}

export interface SymbolsPayload {
  symbols: SymbolRow[];
}

export interface SourceLineInfo {
  line: number;
  kind: string;
  address: number | null;
  length: number;
  word: string | null;
  error: boolean;
}

export interface SourcePayload {
  text: string;
  lines: SourceLineInfo[];
  mode: string;
}

export interface ExplainedField {
  name: string;
  high_bit: number;
  low_bit: number;
  value: number;
  note: string;
}

export interface InstructionExplanation {
  word: string;
  mnemonic: string;
  format: string;
  fields: ExplainedField[];
  operand_summary: string;
  immediate_decimal: number | null;
}

export interface IntExplanation {
  word: string;
  bits: string;
  sign_bit: number;
  magnitude_rule: string;
  decimal_value: number;
}

export interface DoubleExplanation {
  bits: string;
  sign: number;
  exponent_bits: number;
  biased_exponent: number;
  unbiased_exponent: number;
  mantissa_bits: number;
  significand: number;
  decimal_value: string;
  class: string;
}

export type ServerEvent =
  | { event: "output"; text: string }
  | { event: "input_request" }
  | {
      event: "step";
      changes: ChangesPayload;
      pc: number;
      halted: boolean;
      fault: string | null;
    };

export interface ErrorBody {
  code: string;
  message: string;
}

export interface Response {
  id: number | null;
  ok: boolean;
  result?: unknown;
  error?: ErrorBody;
}
