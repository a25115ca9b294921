// Pane renderers.  Every number drawn here is read from a payload; the
// formatting helpers below are the only transformation applied.

import type {
  Diagnostic,
  DisassemblyPayload,
  MemoryPayload,
  RegistersPayload,
  SymbolsPayload,
} from "./protocol.js";

export function hex32(value: number): string {
  return "0x" + (value >>> 0).toString(16).padStart(8, "0");
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export function renderRegisters(
  el: HTMLElement,
  payload: RegistersPayload,
): void {
  const changed = new Set(payload.changed);
  const cells = payload.registers.map((value, i) => {
    const cls = changed.has(i) ? "reg changed" : "reg";
    return (
      `<div class="${cls}" data-reg="${i}">` +
      `<span class="reg-name">x${i}</span>` +
      `<span class="reg-value">${hex32(value)}</span></div>`
    );
  });
  const pcCell =
    `<div class="reg pc-cell"><span class="reg-name">pc</span>` +
    `<span class="reg-value">${hex32(payload.pc)}</span></div>`;
  el.innerHTML = cells.join("") + pcCell;
}

export function renderMemory(el: HTMLElement, payload: MemoryPayload): void {
  const changed = new Set(payload.changed);
  const bytes: number[] = [];
  for (let i = 0; i < payload.bytes.length; i += 2) {
    bytes.push(parseInt(payload.bytes.slice(i, i + 2), 16));
  }
  const rows: string[] = [];
  for (let off = 0; off < bytes.length; off += 16) {
    const chunk = bytes.slice(off, off + 16);
    const cells = chunk
      .map((b, i) => {
        const address = payload.start + off + i;
        const cls = changed.has(address) ? "byte changed" : "byte";
        return `<span class="${cls}" data-addr="${address}">${b
          .toString(16)
          .padStart(2, "0")}</span>`;
      })
      .join(" ");
    rows.push(
      `<div class="mem-row"><span class="mem-addr">${hex32(
        payload.start + off,
      )}</span> ${cells}</div>`,
    );
  }
  el.innerHTML =
    rows.join("") +
    (payload.stale ? `<div class="stale-note">machine stale</div>` : "");
}

export function renderDisassembly(
  el: HTMLElement,
  payload: DisassemblyPayload,
): void {
  const rows = payload.rows.map((row) => {
    const isPc = payload.pc !== null && row.address === payload.pc;
    return (
      `<div class="dis-row${isPc ? " pc-row" : ""}" data-addr="${row.address}">` +
      `<span class="dis-marker">${isPc ? "&#9654;" : "&nbsp;"}</span>` +
      `<span class="dis-addr">${hex32(row.address)}</span>` +
      `<span class="dis-word">${escapeHtml(row.word)}</span>` +
      `<span class="dis-text">${escapeHtml(row.text)}</span></div>`
    );
  });
  el.innerHTML = rows.join("");
}

export function renderDiagnostics(
  el: HTMLElement,
  diagnostics: Diagnostic[],
): void {
  if (!diagnostics.length) {
    el.innerHTML = `<div class="diag-none">no problems</div>`;
    return;
  }
  el.innerHTML = diagnostics
    .map(
      (d) =>
        `<div class="diag-row" data-line="${d.line}">` +
        `<span class="diag-pos">line ${d.line}:${d.start}</span>` +
        `<span class="diag-code">${escapeHtml(d.code)}</span>` +
        `<span class="diag-msg">${escapeHtml(d.message)}</span></div>`,
    )
    .join("");
}

export function renderSymbols(el: HTMLElement, payload: SymbolsPayload): void {
  if (!payload.symbols.length) {
    el.innerHTML = `<div class="diag-none">no symbols</div>`;
    return;
  }
  el.innerHTML = payload.symbols
    .map((sym) => {
      const refs = sym.references
        .map(
          (r) =>
            `<span class="sym-ref${r.stale ? " stale" : ""}">` +
            `${r.line}@${hex32(r.address)}</span>`,
        )
        .join(" ");
      const address = sym.address === null ? "unbound" : hex32(sym.address);
      return (
        `<div class="sym-row"><span class="sym-name">${escapeHtml(
          sym.label,
        )}</span>` +
        `<span class="sym-addr">${address}</span>` +
        `<span class="sym-refs">${refs}</span></div>`
      );
    })
    .join("");
}

export function appendConsole(el: HTMLElement, text: string): void {
  el.textContent = (el.textContent ?? "") + text + "\n";
  el.scrollTop = el.scrollHeight;
}
