"""Protocol service: newline-delimited JSON over sockets, and the REPL.

One connection drives one session.  Requests carry an id and are answered
in order; execution commands run on a worker thread so a `stop` or `input`
message can arrive mid-run.  Unsolicited events (console output, animate
steps, input requests) have no id.  See docs/protocol.md.
"""

from __future__ import annotations

import json
import queue
import socket
import socketserver
import threading
from typing import Callable

from .incremental import event_from_json
from .isa import Undecodable
from .model import LineOutOfRange
from .session import (
    DEFAULT_MAX_STEPS,
    Session,
    SessionError,
    create_session,
    session_apply_edit,
    session_control,
    session_query,
)
from .incremental import PositionOutOfBounds
from .simulator import AlreadyHalted

PROTOCOL_VERSION = 1


class _Interrupted(Exception):
    pass


class SessionHandler:
    """Transport-agnostic message dispatcher for one session."""

    def __init__(self, emit: Callable[[dict], None],
                 mode: str = "incremental"):
        self._emit = emit
        self._emit_lock = threading.Lock()
        self._input: queue.Queue[int] = queue.Queue()
        self._stop = threading.Event()
        self.session: Session = create_session("", mode)
        self.session.hooks.write_text = self._on_output
        self.session.hooks.read_integer = self._on_input_needed

    # -- event plumbing ------------------------------------------------

    def emit(self, message: dict) -> None:
        with self._emit_lock:
            self._emit(message)

    def _on_output(self, text: str) -> None:
        self.emit({"event": "output", "text": text})

    def _on_input_needed(self) -> int:
        self.emit({"event": "input_request"})
        while True:
            try:
                return self._input.get(timeout=0.1)
            except queue.Empty:
                if self._stop.is_set():
                    raise _Interrupted()

    def _observer(self, animate: bool):
        def watch(machine, changes) -> None:
            if self._stop.is_set():
                raise _Interrupted()
            if animate:
                self.emit({"event": "step", "changes": changes.to_json(),
                           "pc": machine.pc, "halted": machine.halted,
                           "fault": machine.fault})
        return watch

    # -- request dispatch ------------------------------------------------

    def handle(self, message: dict) -> dict:
        """Process one request; returns the response object."""
        request_id = message.get("id")
        try:
            result = self._dispatch(message)
            return {"id": request_id, "ok": True, "result": result}
        except _Interrupted:
            return {"id": request_id, "ok": True,
                    "result": {"stop": {"kind": "interrupted"}}}
        except (SessionError, PositionOutOfBounds, LineOutOfRange,
                Undecodable, AlreadyHalted, KeyError, ValueError,
                TypeError) as exc:
            code = getattr(exc, "code", exc.__class__.__name__)
            return {"id": request_id, "ok": False,
                    "error": {"code": code, "message": str(exc)}}

    def _dispatch(self, message: dict) -> dict:
        op = message.get("op")
        session = self.session
        if op == "hello":
            return {"version": PROTOCOL_VERSION, "session": session.id,
                    "mode": session.mode}
        if op == "load":
            mode = message.get("mode", session.mode)
            self.session = create_session(message.get("text", ""), mode)
            self.session.hooks.write_text = self._on_output
            self.session.hooks.read_integer = self._on_input_needed
            return {"session": self.session.id, "mode": mode,
                    "lines": len(self.session.document.lines)}
        if op == "edit":
            delta = session_apply_edit(session,
                                       event_from_json(message["event"]))
            return {"delta": delta.to_json(),
                    "diagnostics": [d.to_json() for d in
                                    session.state.aggregated_diagnostics()]}
        if op == "control":
            command = message.get("command", "")
            self._stop.clear()
            return session_control(
                session, command,
                max_steps=int(message.get("max_steps", DEFAULT_MAX_STEPS)),
                observer=self._observer(command == "animate")
                if command in ("run", "animate") else None)
        if op == "query":
            params = {k: v for k, v in message.items()
                      if k not in ("id", "op", "pane")}
            return session_query(session, message.get("pane", ""), **params)
        if op == "stop":
            self._stop.set()
            return {"stopping": True}
        if op == "input":
            self._input.put(int(message.get("value", 0)))
            return {"accepted": True}
        raise SessionError(f"unknown op {op!r}")


EXECUTION_OPS = frozenset({"control"})


class _ConnectionHandler(socketserver.StreamRequestHandler):
    """One TCP connection == one session.  Execution requests run on a
    worker thread so stop/input messages get through mid-run."""

    def handle(self) -> None:
        lock = threading.Lock()

        def send(obj: dict) -> None:
            payload = (json.dumps(obj) + "\n").encode("utf-8")
            with lock:
                try:
                    self.wfile.write(payload)
                    self.wfile.flush()
                except (BrokenPipeError, OSError):
                    pass

        handler = SessionHandler(send, mode=self.server.mode)
        workers: list[threading.Thread] = []
        for raw in self.rfile:
            raw = raw.strip()
            if not raw:
                continue
            try:
                message = json.loads(raw)
            except json.JSONDecodeError as exc:
                send({"id": None, "ok": False,
                      "error": {"code": "bad-json", "message": str(exc)}})
                continue
            if message.get("op") in EXECUTION_OPS:
                worker = threading.Thread(
                    target=lambda m=message: send(handler.handle(m)),
                    daemon=True)
                worker.start()
                workers.append(worker)
            else:
                send(handler.handle(message))
        for worker in workers:
            worker.join(timeout=1.0)


class ProtocolServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str = "127.0.0.1", port: int = 0,
                 mode: str = "incremental"):
        super().__init__((host, port), _ConnectionHandler)
        self.mode = mode

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address


def serve_tcp(host: str, port: int, mode: str = "incremental") -> None:
    with ProtocolServer(host, port, mode) as server:
        print(f"protocol server listening on "
              f"{server.address[0]}:{server.address[1]}")
        server.serve_forever()


class ProtocolClient:
    """Blocking ndjson client used by tests and the REPL-over-socket."""

    def __init__(self, host: str, port: int):
        self._sock = socket.create_connection((host, port))
        self._file = self._sock.makefile("r", encoding="utf-8")
        self._next_id = 1
        self.events: list[dict] = []

    def request(self, op: str, **params) -> dict:
        message = {"id": self._next_id, "op": op, **params}
        self._next_id += 1
        self._sock.sendall((json.dumps(message) + "\n").encode("utf-8"))
        while True:
            line = self._file.readline()
            if not line:
                raise ConnectionError("server closed the connection")
            obj = json.loads(line)
            if "event" in obj:
                self.events.append(obj)
                continue
            return obj

    def send_raw(self, message: dict) -> None:
        self._sock.sendall((json.dumps(message) + "\n").encode("utf-8"))

    def read_message(self) -> dict:
        return json.loads(self._file.readline())

    def close(self) -> None:
        self._sock.close()
