// The three explain dialogs, drawn as labeled bit-row diagrams from the
// explanation payloads.

import type {
  DoubleExplanation,
  InstructionExplanation,
  IntExplanation,
} from "./protocol.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

function fieldBox(
  name: string,
  bits: string,
  value: string,
  note: string,
  width: number,
): string {
  return (
    `<div class="field-box" style="flex-grow:${width}">` +
    `<div class="field-bits">${bits}</div>` +
    `<div class="field-name">${escapeHtml(name)}</div>` +
    `<div class="field-value">${escapeHtml(value)}</div>` +
    `<div class="field-note">${escapeHtml(note)}</div></div>`
  );
}

export function renderInstructionExplanation(
  el: HTMLElement,
  payload: InstructionExplanation,
): void {
  const boxes = payload.fields
    .map((f) => {
      const width = f.high_bit - f.low_bit + 1;
      const bits = `${f.high_bit}..${f.low_bit}`;
      const binary = f.value.toString(2).padStart(width, "0");
      return fieldBox(f.name, bits, binary, f.note, width);
    })
    .join("");
  el.innerHTML =
    `<h3>Instruction ${payload.word}</h3>` +
    `<div class="explain-summary">${escapeHtml(payload.operand_summary)} ` +
    `&mdash; ${payload.format}-format ${escapeHtml(payload.mnemonic)}</div>` +
    `<div class="field-row">${boxes}</div>` +
    (payload.immediate_decimal !== null
      ? `<div class="explain-extra">immediate = ${payload.immediate_decimal}</div>`
      : "");
}

export function renderIntExplanation(
  el: HTMLElement,
  payload: IntExplanation,
): void {
  const cells = [...payload.bits]
    .map(
      (bit, i) =>
        `<span class="bit-cell${i === 0 ? " sign-bit" : ""}">${bit}</span>`,
    )
    .join("");
  el.innerHTML =
    `<h3>Signed integer ${payload.word}</h3>` +
    `<div class="bit-row">${cells}</div>` +
    `<div class="explain-summary">sign bit = ${payload.sign_bit}</div>` +
    `<div class="explain-extra">${escapeHtml(payload.magnitude_rule)}</div>` +
    `<div class="explain-result">value = ${payload.decimal_value}</div>`;
}

export function renderDoubleExplanation(
  el: HTMLElement,
  payload: DoubleExplanation,
): void {
  const row =
    fieldBox("sign", "63", String(payload.sign), payload.sign ? "-" : "+", 4) +
    fieldBox(
      "exponent",
      "62..52",
      payload.exponent_bits.toString(2).padStart(11, "0"),
      `biased ${payload.biased_exponent}, unbiased ${payload.unbiased_exponent}`,
      11,
    ) +
    fieldBox(
      "mantissa",
      "51..0",
      "0x" + payload.mantissa_bits.toString(16).padStart(13, "0"),
      `significand ${payload.significand}`,
      26,
    );
  el.innerHTML =
    `<h3>Double ${payload.bits}</h3>` +
    `<div class="field-row">${row}</div>` +
    `<div class="explain-summary">class: ${escapeHtml(payload.class)}</div>` +
    `<div class="explain-result">value = ${escapeHtml(
      payload.decimal_value,
    )}</div>`;
}

export class Modal {
  readonly element: HTMLElement;
  readonly body: HTMLElement;

  constructor(host: HTMLElement) {
    this.element = document.createElement("div");
    this.element.className = "modal hidden";
    this.body = document.createElement("div");
    this.body.className = "modal-body";
    const close = document.createElement("button");
    close.textContent = "close";
    close.className = "modal-close";
    close.addEventListener("click", () => this.hide());
    this.element.append(this.body, close);
    host.append(this.element);
  }

  show(): void {
    this.element.classList.remove("hidden");
  }

  hide(): void {
    this.element.classList.add("hidden");
  }
}
