"""Browser endpoint: static frontend files plus the protocol over WebSocket.

Each WebSocket connection drives one session with exactly the ndjson
messages of docs/protocol.md, one JSON object per text frame.  Requires the
optional web dependencies (fastapi, uvicorn, websockets).

No `from __future__ import annotations` here: fastapi must evaluate the
locally imported WebSocket annotation eagerly.
"""

import asyncio
import json
from pathlib import Path

from .service import EXECUTION_OPS, SessionHandler

FRONTEND_DIST = Path(__file__).resolve().parents[2] / "frontend" / "dist"


def build_app(mode: str = "incremental", static_dir: "Path | None" = None):
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect
    from fastapi.staticfiles import StaticFiles

    app = FastAPI()

    @app.websocket("/ws")
    async def websocket_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        loop = asyncio.get_running_loop()
        outbox: asyncio.Queue[dict] = asyncio.Queue()

        def emit(message: dict) -> None:
            loop.call_soon_threadsafe(outbox.put_nowait, message)

        handler = SessionHandler(emit, mode=mode)

        async def pump() -> None:
            while True:
                message = await outbox.get()
                await ws.send_text(json.dumps(message))

        pump_task = asyncio.create_task(pump())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    message = json.loads(raw)
                except json.JSONDecodeError as exc:
                    emit({"id": None, "ok": False,
                          "error": {"code": "bad-json", "message": str(exc)}})
                    continue
                if message.get("op") in EXECUTION_OPS:
                    loop.run_in_executor(
                        None, lambda m=message: emit(handler.handle(m)))
                else:
                    emit(handler.handle(message))
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()

    static = static_dir or FRONTEND_DIST
    if static.is_dir():
        app.mount("/", StaticFiles(directory=str(static), html=True),
                  name="frontend")
    return app


def serve_web(host: str = "127.0.0.1", port: int = 8000,
              mode: str = "incremental",
              static_dir: "Path | None" = None) -> None:
    import uvicorn

    app = build_app(mode, static_dir)
    print(f"web UI on http://{host}:{port}/  (WebSocket at /ws)")
    uvicorn.run(app, host=host, port=port, log_level="warning")
