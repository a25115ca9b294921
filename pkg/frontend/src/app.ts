// Application wiring: one session connection feeding the editor and panes.
// Keystrokes go out unthrottled (the engine is built for that); only pane
// redraws coalesce through a queue.

import { Client, RequestError, WsTransport } from "./connection.js";
import { Editor } from "./editor.js";
import {
  Modal,
  renderDoubleExplanation,
  renderInstructionExplanation,
  renderIntExplanation,
} from "./explain.js";
import {
  appendConsole,
  renderDiagnostics,
  renderDisassembly,
  renderMemory,
  renderRegisters,
  renderSymbols,
} from "./panes.js";
import type {
  ControlResult,
  DisassemblyPayload,
  DoubleExplanation,
  EditEventMsg,
  EditResult,
  InstructionExplanation,
  IntExplanation,
  MemoryPayload,
  RegistersPayload,
  SymbolsPayload,
} from "./protocol.js";

export const DEMO_PROGRAM = [
  "# sum the integers 1..10, print, stop",
  "li a0, 0",
  "li t0, 1",
  "loop:",
  "add a0, a0, t0",
  "addi t0, t0, 1",
  "li t1, 11",
  "bne t0, t1, loop",
  "li a7, 1",
  "ecall",
  "li a7, 10",
  "ecall",
].join("\n");

const ANIMATE_INTERVAL_MS = 200;

export class App {
  readonly editor: Editor;
  private client: Client;
  private refreshQueued = false;
  private animateTimer: ReturnType<typeof setInterval> | null = null;
  private panes: Record<string, HTMLElement>;
  private modal: Modal;
  private memoryStart = 0x10000000;

  constructor(
    root: HTMLElement,
    client: Client,
    private requestRedraw: (fn: () => void) => void = (fn) => fn(),
  ) {
    this.client = client;
    root.innerHTML = App.layout();
    this.panes = {
      registers: root.querySelector("#registers") as HTMLElement,
      memory: root.querySelector("#memory") as HTMLElement,
      disassembly: root.querySelector("#disassembly") as HTMLElement,
      diagnostics: root.querySelector("#diagnostics") as HTMLElement,
      symbols: root.querySelector("#symbols") as HTMLElement,
      console: root.querySelector("#console") as HTMLElement,
      banner: root.querySelector("#banner") as HTMLElement,
      status: root.querySelector("#status") as HTMLElement,
    };
    this.editor = new Editor(
      root.querySelector("#editor") as HTMLElement,
      (ev) => this.onEdit(ev),
    );
    this.modal = new Modal(root);
    this.bindToolbar(root);
    this.bindContextMenu(root);
    client.onEvent((ev) => {
      if (ev.event === "output") appendConsole(this.panes.console, ev.text);
      else if (ev.event === "input_request") this.promptInput();
    });
    client.onClose(() => {
      this.editor.setReadOnly(true);
      this.panes.banner.textContent =
        "connection lost: editor is read-only until reload";
      this.panes.banner.classList.remove("hidden");
    });
  }

  static layout(): string {
    return `
      <div id="banner" class="banner hidden"></div>
      <div class="toolbar">
        <button id="btn-demo">load demo</button>
        <button id="btn-reset">reset</button>
        <button id="btn-step">step</button>
        <button id="btn-run">run</button>
        <button id="btn-animate">animate</button>
        <button id="btn-stop">stop</button>
        <span id="status" class="status"></span>
      </div>
      <div class="columns">
        <div class="left">
          <div id="editor"></div>
          <h2>diagnostics</h2><div id="diagnostics" class="pane"></div>
          <h2>console</h2><pre id="console" class="pane console"></pre>
        </div>
        <div class="right">
          <h2>registers</h2><div id="registers" class="pane registers"></div>
          <h2>disassembly</h2><div id="disassembly" class="pane"></div>
          <h2>memory</h2><div id="memory" class="pane"></div>
          <h2>symbols</h2><div id="symbols" class="pane"></div>
        </div>
      </div>`;
  }

  private bindToolbar(root: HTMLElement): void {
    const on = (id: string, fn: () => void) =>
      (root.querySelector(id) as HTMLElement).addEventListener("click", fn);
    on("#btn-demo", () => void this.loadText(DEMO_PROGRAM));
    on("#btn-reset", () => void this.control("reset"));
    on("#btn-step", () => void this.control("step"));
    on("#btn-run", () => void this.control("run"));
    on("#btn-animate", () => this.animate());
    on("#btn-stop", () => void this.stop());
  }

  private bindContextMenu(root: HTMLElement): void {
    const editorEl = root.querySelector("#editor") as HTMLElement;
    editorEl.addEventListener("contextmenu", (e) => {
      e.preventDefault();
      void this.explainInstructionAtCursor();
    });
    const memoryEl = this.panes.memory;
    memoryEl.addEventListener("contextmenu", (e) => {
      e.preventDefault();
      const target = (e.target as HTMLElement).closest(
        "[data-addr]",
      ) as HTMLElement | null;
      if (!target) return;
      const address = Number(target.dataset.addr) & ~3;
      void this.explainMemory(address, e.shiftKey ? "double" : "int");
    });
  }

  async start(initialText: string = DEMO_PROGRAM): Promise<void> {
    await this.client.request("hello");
    await this.loadText(initialText);
  }

  async loadText(text: string): Promise<void> {
    await this.client.request("load", { text });
    this.editor.setText(text);
    const diags = await this.client.request<{ diagnostics: [] }>("query", {
      pane: "diagnostics",
    });
    this.editor.setDiagnostics(diags.diagnostics);
    renderDiagnostics(this.panes.diagnostics, diags.diagnostics);
    await this.refreshPanes();
  }

  private onEdit(ev: EditEventMsg): void {
    void this.client
      .request<EditResult>("edit", { event: ev })
      .then((result) => {
        // inline squiggles straight from the response
        this.editor.setDiagnostics(result.diagnostics);
        renderDiagnostics(this.panes.diagnostics, result.diagnostics);
        this.queueRefresh();
      })
      .catch((err) => this.showError(err));
  }

  private queueRefresh(): void {
    if (this.refreshQueued) return;
    this.refreshQueued = true;
    this.requestRedraw(() => {
      this.refreshQueued = false;
      void this.refreshPanes();
    });
  }

  async refreshPanes(): Promise<void> {
    const [registers, disassembly, memory, symbols] = await Promise.all([
      this.client.request<RegistersPayload>("query", { pane: "registers" }),
      this.client.request<DisassemblyPayload>("query", {
        pane: "disassembly",
        start: 0,
        count: 32,
      }),
      this.client.request<MemoryPayload>("query", {
        pane: "memory",
        start: this.memoryStart,
        length: 128,
      }),
      this.client.request<SymbolsPayload>("query", { pane: "symbols" }),
    ]);
    renderRegisters(this.panes.registers, registers);
    renderDisassembly(this.panes.disassembly, disassembly);
    renderMemory(this.panes.memory, memory);
    renderSymbols(this.panes.symbols, symbols);
    if (registers.machine) {
      const m = registers.machine;
      this.panes.status.textContent = m.fault
        ? `fault: ${m.fault} after ${m.steps} steps`
        : m.halted
          ? `halted after ${m.steps} steps`
          : `${m.steps} steps${m.stale ? " (stale: reset to rerun)" : ""}`;
    } else {
      this.panes.status.textContent = "not running";
    }
  }

  async control(command: string, maxSteps?: number): Promise<void> {
    try {
      await this.client.request<ControlResult>("control", {
        command,
        ...(maxSteps ? { max_steps: maxSteps } : {}),
      });
    } catch (err) {
      this.showError(err);
    }
    await this.refreshPanes();
  }

  animate(): void {
    if (this.animateTimer) return;
    this.animateTimer = setInterval(() => {
      void this.client
        .request<ControlResult>("control", { command: "step" })
        .then(() => this.refreshPanes())
        .catch((err) => {
          this.stopAnimate();
          this.showError(err);
        });
    }, ANIMATE_INTERVAL_MS);
  }

  private stopAnimate(): void {
    if (this.animateTimer) {
      clearInterval(this.animateTimer);
      this.animateTimer = null;
    }
  }

  async stop(): Promise<void> {
    this.stopAnimate();
    await this.client.request("stop");
  }

  private promptInput(): void {
    const raw = window.prompt("program requests an integer:") ?? "0";
    void this.client.request("input", { value: parseInt(raw, 10) || 0 });
  }

  private async explainInstructionAtCursor(): Promise<void> {
    try {
      const payload = await this.client.request<InstructionExplanation>(
        "query",
        {
          pane: "explain",
          request: { what: "instruction", line: this.editor.cursorLine },
        },
      );
      renderInstructionExplanation(this.modal.body, payload);
      this.modal.show();
    } catch (err) {
      this.showError(err);
    }
  }

  private async explainMemory(
    address: number,
    what: "int" | "double",
  ): Promise<void> {
    try {
      const size = what === "double" ? 8 : 4;
      const memory = await this.client.request<MemoryPayload>("query", {
        pane: "memory",
        start: address,
        length: size,
      });
      let value = 0n;
      const bytes = memory.bytes;
      for (let i = bytes.length - 2; i >= 0; i -= 2) {
        value = (value << 8n) | BigInt(parseInt(bytes.slice(i, i + 2), 16));
      }
      if (what === "int") {
        const payload = await this.client.request<IntExplanation>("query", {
          pane: "explain",
          request: { what: "int", word: Number(value) },
        });
        renderIntExplanation(this.modal.body, payload);
      } else {
        // 64-bit pattern travels as a decimal string; JSON numbers would
        // round above 2^53
        const payload = await this.client.request<DoubleExplanation>("query", {
          pane: "explain",
          request: { what: "double", bits: value.toString() },
        });
        renderDoubleExplanation(this.modal.body, payload);
      }
      this.modal.show();
    } catch (err) {
      this.showError(err);
    }
  }

  private showError(err: unknown): void {
    const text =
      err instanceof RequestError
        ? `[${err.code}] ${err.message}`
        : String(err);
    appendConsole(this.panes.console, `error: ${text}`);
  }
}

export function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const transport = new WsTransport(`${proto}://${location.host}/ws`);
  const client = new Client(transport);
  const app = new App(root, client, (fn) => requestAnimationFrame(fn));
  void transport.ready().then(() => app.start());
}
