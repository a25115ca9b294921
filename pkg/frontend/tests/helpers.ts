// Shared test plumbing: recorded backend responses and a fake transport
// that replays them, so no value in these tests is invented client-side.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { Client } from "../src/connection.js";
import type { Transport } from "../src/connection.js";

const here = dirname(fileURLToPath(import.meta.url));

export interface Recorded {
  demo_text: string;
  inserted_text: string;
  golden_events: Record<string, unknown>[];
  responses: Record<string, unknown[]>;
  console_events: Record<string, unknown>[];
}

export function loadRecorded(): Recorded {
  return JSON.parse(
    readFileSync(join(here, "fixtures", "recorded.json"), "utf-8"),
  );
}

export function loadGoldenTrace(): string[] {
  return readFileSync(join(here, "golden_trace.ndjson"), "utf-8")
    .trim()
    .split("\n");
}

function sortedStringify(value: unknown): string {
  if (Array.isArray(value)) {
    return "[" + value.map(sortedStringify).join(",") + "]";
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => JSON.stringify(k) + ":" + sortedStringify(v));
    return "{" + entries.join(",") + "}";
  }
  return JSON.stringify(value);
}

export function requestKey(message: Record<string, unknown>): string {
  const op = message.op as string;
  if (op === "edit") return "edit|" + sortedStringify(message.event);
  if (op === "query") {
    const params: Record<string, unknown> = {};
    for (const key of Object.keys(message).sort()) {
      if (!["id", "op", "pane"].includes(key)) params[key] = message[key];
    }
    return `query|${message.pane ?? ""}|` + sortedStringify(params);
  }
  if (op === "control") return `control|${message.command ?? ""}`;
  if (op === "load") return "load";
  return op;
}

/** Replays recorded responses; consumes sequenced results in order. */
export class ReplayTransport implements Transport {
  sent: string[] = [];
  private messageCb: ((text: string) => void) | null = null;
  private closeCb: (() => void) | null = null;
  private cursor = new Map<string, number>();

  constructor(private responses: Record<string, unknown[]>) {}

  send(text: string): void {
    this.sent.push(text);
    const message = JSON.parse(text);
    const key = requestKey(message);
    const bucket = this.responses[key];
    if (!bucket) {
      this.messageCb?.(
        JSON.stringify({
          id: message.id,
          ok: false,
          error: { code: "unrecorded", message: key },
        }),
      );
      return;
    }
    const index = this.cursor.get(key) ?? 0;
    const result = bucket[Math.min(index, bucket.length - 1)];
    this.cursor.set(key, index + 1);
    this.messageCb?.(JSON.stringify({ id: message.id, ok: true, result }));
  }

  onMessage(cb: (text: string) => void): void {
    this.messageCb = cb;
  }
  onClose(cb: () => void): void {
    this.closeCb = cb;
  }
  simulateClose(): void {
    this.closeCb?.();
  }

  sentEvents(): Record<string, unknown>[] {
    return this.sent
      .map((text) => JSON.parse(text))
      .filter((m) => m.op === "edit")
      .map((m) => m.event);
  }
}

export function replayClient(): { client: Client; transport: ReplayTransport } {
  const transport = new ReplayTransport(loadRecorded().responses);
  const client = new Client(transport);
  return { client, transport };
}
