"""Interactive shell over the session protocol, in-process.

Every command is translated into the same protocol messages the web UI
sends, so the two frontends cannot drift apart behaviorally.
"""

from __future__ import annotations

import json
import shlex

from .service import SessionHandler

_HELP = """\
commands:
  text                         show the source with addresses
  type LINE COL TEXT...        insert characters one keystroke at a time
  newline LINE COL             split / insert an empty line
  del L1 C1 L2 C2              delete a range (full reassembly)
  paste LINE COL TEXT...       paste text (full reassembly)
  reset | step | run [N] | animate [N]
  regs                         register pane
  mem ADDR [LEN]               memory pane
  disasm [ADDR [COUNT]]        disassembly pane
  sym                          symbol table
  diag                         diagnostics
  explain instr WORD | int WORD | double BITS
  input VALUE                  answer a pending input request
  raw JSON                     send a raw protocol message
  quit
"""


def _parse_int(token: str) -> int:
    return int(token, 16) if token.lower().startswith("0x") else int(token)


class Repl:
    def __init__(self, initial_text: str = "", mode: str = "incremental",
                 out=None):
        import sys
        self._out = out or sys.stdout
        self.handler = SessionHandler(self._event, mode=mode)
        if initial_text:
            self._request("load", text=initial_text, mode=mode)

    def _print(self, text: str) -> None:
        self._out.write(text + "\n")

    def _event(self, message: dict) -> None:
        kind = message.get("event")
        if kind == "output":
            self._print(f"[console] {message['text']}")
        elif kind == "input_request":
            self._print("[input requested: use `input VALUE`]")
        elif kind == "step":
            self._print(f"[step] pc=0x{message['pc']:08x} "
                        f"changes={message['changes']}")
        else:
            self._print(f"[event] {json.dumps(message)}")

    def _request(self, op: str, **params) -> dict | None:
        response = self.handler.handle({"id": 0, "op": op, **params})
        if not response["ok"]:
            error = response["error"]
            self._print(f"error [{error['code']}]: {error['message']}")
            return None
        return response["result"]

    def _edit(self, event: dict) -> None:
        result = self._request("edit", event=event)
        if result is None:
            return
        delta = result["delta"]
        note = delta["class"] + (f" ({delta['reason']})"
                                 if delta.get("reason") else "")
        self._print(f"assembled: {note}")
        for diag in result["diagnostics"]:
            self._print(f"  line {diag['line']} [{diag['code']}] "
                        f"{diag['message']}")

    def run_command(self, line: str) -> bool:
        """Execute one command; returns False when quitting."""
        line = line.strip()
        if not line:
            return True
        if line in ("quit", "exit", "q"):
            return False
        if line == "help":
            self._print(_HELP)
            return True
        try:
            parts = shlex.split(line)
        except ValueError as exc:
            self._print(f"parse error: {exc}")
            return True
        cmd, args = parts[0], parts[1:]
        try:
            self._run(cmd, args, line)
        except (ValueError, IndexError) as exc:
            self._print(f"error: {exc}")
        return True

    def _run(self, cmd: str, args: list[str], raw_line: str) -> None:
        if cmd == "text":
            payload = self._request("query", pane="source")
            if payload is None:
                return
            for info, text in zip(payload["lines"],
                                  payload["text"].split("\n")
                                  if payload["text"] else []):
                addr = f"0x{info['address']:08x}" \
                    if info["address"] is not None else "          "
                marker = "!" if info["error"] else " "
                self._print(f"{info['line']:>4} {addr} {marker} {text}")
        elif cmd == "type":
            line_no, col = _parse_int(args[0]), _parse_int(args[1])
            text = raw_line.split(None, 3)[3]
            for i, ch in enumerate(text):
                self._edit({"op": "insert_char", "line": line_no,
                            "col": col + i, "ch": ch})
        elif cmd == "newline":
            self._edit({"op": "insert_newline", "line": _parse_int(args[0]),
                        "col": _parse_int(args[1])})
        elif cmd == "del":
            self._edit({"op": "delete_range",
                        "start_line": _parse_int(args[0]),
                        "start_col": _parse_int(args[1]),
                        "end_line": _parse_int(args[2]),
                        "end_col": _parse_int(args[3])})
        elif cmd == "paste":
            text = raw_line.split(None, 3)[3]
            self._edit({"op": "paste", "line": _parse_int(args[0]),
                        "col": _parse_int(args[1]), "text": text})
        elif cmd in ("reset", "step", "run", "animate"):
            params = {"command": cmd}
            if args:
                params["max_steps"] = _parse_int(args[0])
            result = self._request("control", **params)
            if result is not None:
                self._print(json.dumps(result))
        elif cmd == "regs":
            payload = self._request("query", pane="registers")
            if payload is None:
                return
            changed = set(payload["changed"])
            for i in range(0, 32, 4):
                cells = []
                for r in range(i, i + 4):
                    mark = "*" if r in changed else " "
                    cells.append(f"x{r:<2}{mark}0x{payload['registers'][r]:08x}")
                self._print("  ".join(cells))
            self._print(f"pc  0x{payload['pc']:08x}")
        elif cmd == "mem":
            start = _parse_int(args[0])
            length = _parse_int(args[1]) if len(args) > 1 else 64
            payload = self._request("query", pane="memory", start=start,
                                    length=length)
            if payload is None:
                return
            blob = bytes.fromhex(payload["bytes"])
            for off in range(0, len(blob), 16):
                chunk = blob[off:off + 16]
                hexes = " ".join(f"{b:02x}" for b in chunk)
                self._print(f"0x{start + off:08x}  {hexes}")
        elif cmd == "disasm":
            start = _parse_int(args[0]) if args else 0
            count = _parse_int(args[1]) if len(args) > 1 else 16
            payload = self._request("query", pane="disassembly",
                                    start=start, count=count)
            if payload is None:
                return
            for row in payload["rows"]:
                marker = "->" if row["address"] == payload["pc"] else "  "
                self._print(f"{marker} 0x{row['address']:08x} "
                            f"{row['word']}  {row['text']}")
        elif cmd == "sym":
            payload = self._request("query", pane="symbols")
            if payload is None:
                return
            for sym in payload["symbols"]:
                addr = f"0x{sym['address']:08x}" \
                    if sym["address"] is not None else "unbound"
                refs = ", ".join(
                    f"line {r['line']}@0x{r['address']:x}"
                    + (" (stale)" if r["stale"] else "")
                    for r in sym["references"])
                self._print(f"{sym['label']}: decl line "
                            f"{sym['declaration_line']}, {addr}"
                            + (f", refs: {refs}" if refs else ""))
        elif cmd == "diag":
            payload = self._request("query", pane="diagnostics")
            if payload is None:
                return
            if not payload["diagnostics"]:
                self._print("no diagnostics")
            for diag in payload["diagnostics"]:
                self._print(f"line {diag['line']} cols {diag['start']}-"
                            f"{diag['end']} [{diag['code']}] "
                            f"{diag['message']}")
        elif cmd == "explain":
            what = {"instr": "instruction", "int": "int",
                    "double": "double"}[args[0]]
            key = "bits" if what == "double" else "word"
            payload = self._request("query", pane="explain",
                                    request={"what": what,
                                             key: _parse_int(args[1])})
            if payload is not None:
                self._print(json.dumps(payload, indent=2))
        elif cmd == "input":
            self._request("input", value=_parse_int(args[0]))
        elif cmd == "raw":
            message = json.loads(raw_line.split(None, 1)[1])
            self._print(json.dumps(self.handler.handle(message)))
        else:
            self._print(f"unknown command '{cmd}' (try `help`)")


def run_repl(initial_text: str = "", mode: str = "incremental") -> None:
    repl = Repl(initial_text, mode)
    repl._print("interactive assembler; `help` lists commands")
    if initial_text:
        repl.run_command("text")
    while True:
        try:
            line = input("asm> ")
        except (EOFError, KeyboardInterrupt):
            print()
            break
        if not repl.run_command(line):
            break
