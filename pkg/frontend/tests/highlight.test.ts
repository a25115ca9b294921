// Changed-value highlighting: exactly the registers and bytes the last
// instruction wrote get the highlight class, cleared on the next step.

import { describe, expect, it } from "vitest";
import { renderMemory, renderRegisters } from "../src/panes.js";
import type { MemoryPayload, RegistersPayload } from "../src/protocol.js";
import { loadRecorded } from "./helpers.js";

function changedRegs(el: HTMLElement): number[] {
  return [...el.querySelectorAll(".reg.changed")].map((cell) =>
    Number((cell as HTMLElement).dataset.reg),
  );
}

describe("register highlighting", () => {
  const recorded = loadRecorded();
  const registersSeq = recorded.responses[
    "query|registers|{}"
  ] as unknown as RegistersPayload[];
  const stepSeq = recorded.responses["control|step"] as unknown as Array<{
    changes: { registers: number[] };
  }>;

  it("highlights exactly the ChangeSet registers after each step", () => {
    const el = document.createElement("div");
    // recorded sequence: index 0/1 are pre-run queries; the rest follow steps
    const afterSteps = registersSeq.slice(registersSeq.length - 4);
    afterSteps.forEach((payload, i) => {
      renderRegisters(el, payload);
      expect(changedRegs(el).sort()).toEqual(
        [...stepSeq[i].changes.registers].sort(),
      );
      expect(changedRegs(el)).toEqual(payload.changed);
    });
  });

  it("clears previous highlights on the next step", () => {
    const el = document.createElement("div");
    const afterSteps = registersSeq.slice(registersSeq.length - 4);
    renderRegisters(el, afterSteps[0]);
    const first = changedRegs(el);
    renderRegisters(el, afterSteps[1]);
    const second = changedRegs(el);
    expect(first).not.toEqual(second);
    for (const reg of first) {
      if (!afterSteps[1].changed.includes(reg)) {
        expect(second).not.toContain(reg);
      }
    }
  });

  it("renders all 32 registers plus pc", () => {
    const el = document.createElement("div");
    renderRegisters(el, registersSeq[0]);
    expect(el.querySelectorAll(".reg").length).toBe(33);
  });
});

describe("memory highlighting", () => {
  it("marks changed byte addresses", () => {
    const el = document.createElement("div");
    const payload: MemoryPayload = {
      start: 0x10000000,
      bytes: "00112233445566778899aabbccddeeff",
      changed: [0x10000004, 0x10000005],
      from_machine: true,
      stale: false,
    };
    renderMemory(el, payload);
    const marked = [...el.querySelectorAll(".byte.changed")].map((cell) =>
      Number((cell as HTMLElement).dataset.addr),
    );
    expect(marked).toEqual([0x10000004, 0x10000005]);
  });
});
