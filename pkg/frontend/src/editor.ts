// The code editor: every keystroke becomes exactly one protocol edit event
// (multi-character input, IME or clipboard, becomes one paste event).
// The buffer kept here is a display mirror only; the engine owns the truth
// and all derived values arrive as payloads.

import type { Diagnostic, EditEventMsg } from "./protocol.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export class Editor {
  readonly element: HTMLElement;
  lines: string[] = [];
  cursorLine = 0;
  cursorCol = 0;
  private diagnostics: Diagnostic[] = [];
  private readOnly = false;

  constructor(
    host: HTMLElement,
    private send: (ev: EditEventMsg) => void,
  ) {
    this.element = host;
    host.classList.add("editor");
    host.tabIndex = 0;
    host.addEventListener("keydown", (e) => this.handleKeydown(e));
    host.addEventListener("paste", (e) => this.handlePaste(e));
    host.addEventListener("mousedown", (e) => this.handleMouse(e));
    this.render();
  }

  text(): string {
    return this.lines.join("\n");
  }

  setText(text: string): void {
    this.lines = text === "" ? [] : text.split("\n");
    this.cursorLine = 0;
    this.cursorCol = 0;
    this.diagnostics = [];
    this.render();
  }

  setDiagnostics(diagnostics: Diagnostic[]): void {
    this.diagnostics = diagnostics;
    this.render();
  }

  setReadOnly(value: boolean): void {
    this.readOnly = value;
    this.element.classList.toggle("read-only", value);
  }

  private clampCursor(): void {
    if (this.lines.length === 0) {
      this.cursorLine = 0;
      this.cursorCol = 0;
      return;
    }
    this.cursorLine = Math.max(0, Math.min(this.cursorLine, this.lines.length - 1));
    this.cursorCol = Math.max(
      0,
      Math.min(this.cursorCol, this.lines[this.cursorLine].length),
    );
  }

  // Applies the same buffer semantics as the engine's document so the
  // mirror never drifts (an empty buffer has zero lines).
  private applyLocal(ev: EditEventMsg): void {
    if (this.lines.length === 0) this.lines = [""];
    if (ev.op === "insert_char") {
      const text = this.lines[ev.line];
      this.lines[ev.line] =
        text.slice(0, ev.col) + ev.ch + text.slice(ev.col);
    } else if (ev.op === "insert_newline") {
      const text = this.lines[ev.line];
      this.lines.splice(ev.line, 1, text.slice(0, ev.col), text.slice(ev.col));
    } else if (ev.op === "paste") {
      const text = this.lines[ev.line];
      const merged = text.slice(0, ev.col) + ev.text + text.slice(ev.col);
      this.lines.splice(ev.line, 1, ...merged.split("\n"));
      if (this.lines.length === 1 && this.lines[0] === "") this.lines = [];
    } else {
      const first = this.lines[ev.start_line].slice(0, ev.start_col);
      const last = this.lines[ev.end_line].slice(ev.end_col);
      this.lines.splice(
        ev.start_line,
        ev.end_line - ev.start_line + 1,
        first + last,
      );
      if (this.lines.length === 1 && this.lines[0] === "") this.lines = [];
    }
  }

  private dispatch(ev: EditEventMsg): void {
    this.applyLocal(ev);
    this.send(ev);
  }

  private handleKeydown(e: KeyboardEvent): void {
    if (this.readOnly) return;
    const key = e.key;
    if (e.ctrlKey || e.metaKey || e.altKey) return;

    if (key.length === 1) {
      e.preventDefault();
      this.dispatch({
        op: "insert_char",
        line: this.cursorLine,
        col: this.cursorCol,
        ch: key,
      });
      this.cursorCol += 1;
      this.render();
      return;
    }
    switch (key) {
      case "Enter": {
        e.preventDefault();
        this.dispatch({
          op: "insert_newline",
          line: this.cursorLine,
          col: this.cursorCol,
        });
        this.cursorLine += 1;
        this.cursorCol = 0;
        break;
      }
      case "Backspace": {
        e.preventDefault();
        if (this.lines.length === 0) break;
        if (this.cursorCol > 0) {
          this.dispatch({
            op: "delete_range",
            start_line: this.cursorLine,
            start_col: this.cursorCol - 1,
            end_line: this.cursorLine,
            end_col: this.cursorCol,
          });
          this.cursorCol -= 1;
        } else if (this.cursorLine > 0) {
          const previous = this.lines[this.cursorLine - 1].length;
          this.dispatch({
            op: "delete_range",
            start_line: this.cursorLine - 1,
            start_col: previous,
            end_line: this.cursorLine,
            end_col: 0,
          });
          this.cursorLine -= 1;
          this.cursorCol = previous;
        }
        break;
      }
      case "Delete": {
        e.preventDefault();
        if (this.lines.length === 0) break;
        const line = this.lines[this.cursorLine];
        if (this.cursorCol < line.length) {
          this.dispatch({
            op: "delete_range",
            start_line: this.cursorLine,
            start_col: this.cursorCol,
            end_line: this.cursorLine,
            end_col: this.cursorCol + 1,
          });
        } else if (this.cursorLine < this.lines.length - 1) {
          this.dispatch({
            op: "delete_range",
            start_line: this.cursorLine,
            start_col: this.cursorCol,
            end_line: this.cursorLine + 1,
            end_col: 0,
          });
        }
        break;
      }
      case "Tab": {
        e.preventDefault();
        for (let i = 0; i < 2; i++) {
          this.dispatch({
            op: "insert_char",
            line: this.cursorLine,
            col: this.cursorCol,
            ch: " ",
          });
          this.cursorCol += 1;
        }
        break;
      }
      case "ArrowLeft":
        e.preventDefault();
        if (this.cursorCol > 0) this.cursorCol -= 1;
        else if (this.cursorLine > 0) {
          this.cursorLine -= 1;
          this.cursorCol = this.lines[this.cursorLine].length;
        }
        break;
      case "ArrowRight": {
        e.preventDefault();
        const current = this.lines[this.cursorLine] ?? "";
        if (this.cursorCol < current.length) this.cursorCol += 1;
        else if (this.cursorLine < this.lines.length - 1) {
          this.cursorLine += 1;
          this.cursorCol = 0;
        }
        break;
      }
      case "ArrowUp":
        e.preventDefault();
        this.cursorLine -= 1;
        this.clampCursor();
        break;
      case "ArrowDown":
        e.preventDefault();
        this.cursorLine += 1;
        this.clampCursor();
        break;
      case "Home":
        e.preventDefault();
        this.cursorCol = 0;
        break;
      case "End":
        e.preventDefault();
        this.cursorCol = (this.lines[this.cursorLine] ?? "").length;
        break;
      default:
        return;
    }
    this.render();
  }

  private handlePaste(e: ClipboardEvent): void {
    e.preventDefault();
    if (this.readOnly) return;
    const text = e.clipboardData?.getData("text/plain") ?? "";
    if (!text) return;
    this.dispatch({
      op: "paste",
      line: this.cursorLine,
      col: this.cursorCol,
      text,
    });
    const pasted = text.split("\n");
    if (pasted.length === 1) {
      this.cursorCol += text.length;
    } else {
      this.cursorLine += pasted.length - 1;
      this.cursorCol = pasted[pasted.length - 1].length;
    }
    this.render();
  }

  private handleMouse(e: MouseEvent): void {
    const target = e.target as HTMLElement;
    const lineEl = target.closest("[data-line]") as HTMLElement | null;
    if (!lineEl) return;
    this.cursorLine = Number(lineEl.dataset.line);
    const rect = lineEl.getBoundingClientRect();
    const approx = Math.round((e.clientX - rect.left - 34) / 8.4);
    this.cursorCol = Math.max(0, approx);
    this.clampCursor();
    this.render();
    this.element.focus();
  }

  placeCursor(line: number, col: number): void {
    this.cursorLine = line;
    this.cursorCol = col;
    this.clampCursor();
    this.render();
  }

  render(): void {
    const byLine = new Map<number, Diagnostic[]>();
    for (const diag of this.diagnostics) {
      const list = byLine.get(diag.line) ?? [];
      list.push(diag);
      byLine.set(diag.line, list);
    }
    const rows = (this.lines.length ? this.lines : [""]).map((text, i) => {
      const marks = byLine.get(i) ?? [];
      let html = "";
      let pos = 0;
      const sorted = [...marks].sort((a, b) => a.start - b.start);
      for (const mark of sorted) {
        const start = Math.max(pos, Math.min(mark.start, text.length));
        const end = Math.min(Math.max(mark.end, start), text.length);
        if (start > pos) html += escapeHtml(text.slice(pos, start));
        html += `<span class="squiggle" title="${escapeHtml(mark.message)}">${
          escapeHtml(text.slice(start, end)) || "&nbsp;"
        }</span>`;
        pos = Math.max(pos, end);
      }
      html += escapeHtml(text.slice(pos));
      if (i === this.cursorLine) {
        html = this.withCursor(text, html);
      }
      return `<div class="line${marks.length ? " has-error" : ""}" data-line="${i}"><span class="gutter">${i}</span><span class="content">${html || "&nbsp;"}</span></div>`;
    });
    this.element.innerHTML = rows.join("");
  }

  private withCursor(_text: string, html: string): string {
    return `${html}<span class="cursor" data-col="${this.cursorCol}"></span>`;
  }
}
