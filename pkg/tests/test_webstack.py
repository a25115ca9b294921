"""Web endpoint and cross-language golden-trace replay.

The frontend's committed trace must drive the engine to the same result the
UI tests assert, and the WebSocket endpoint must speak the same protocol as
the TCP transport.
"""

import json
from pathlib import Path

import pytest

from rvstudio.assembler import assemble_full
from rvstudio.incremental import Document, apply_edit, event_from_json

FRONTEND = Path(__file__).parents[1] / "frontend"
GOLDEN = FRONTEND / "tests" / "golden_trace.ndjson"
RECORDED = FRONTEND / "tests" / "fixtures" / "recorded.json"


@pytest.mark.skipif(not GOLDEN.exists(), reason="frontend sources absent")
class TestGoldenTraceReplay:
    def test_replaying_the_committed_trace_assembles_the_instruction(self):
        blob = json.loads(RECORDED.read_text())
        events = [event_from_json(json.loads(line))
                  for line in GOLDEN.read_text().splitlines() if line]
        assert len(events) == 18  # newline + 17 keystrokes
        doc = Document(blob["demo_text"])
        state = assemble_full(blob["demo_text"])
        for event in events:
            state, _, _ = apply_edit(state, doc, event)
        assert doc.lines[5] == "addi x1, x2, -121"
        entry = state.lines[5]
        assert entry.instruction == 0xF8710093
        assert entry.address == 12
        assert not entry.error
        assert state.projection() == assemble_full(doc.text()).projection()

    def test_recorded_fixture_matches_live_backend(self):
        """The committed pane payloads replay against the live handler."""
        from rvstudio.service import SessionHandler
        blob = json.loads(RECORDED.read_text())
        handler = SessionHandler(lambda event: None)
        handler.handle({"id": 0, "op": "load", "text": blob["demo_text"]})
        for event in blob["golden_events"]:
            response = handler.handle({"id": 0, "op": "edit", "event": event})
            assert response["ok"]
        live = handler.handle({"id": 0, "op": "query",
                               "pane": "source"})["result"]
        recorded = blob["responses"]["query|source|{}"][1]
        assert live == recorded


class TestWebSocketEndpoint:
    def test_ws_protocol_round_trip(self):
        fastapi = pytest.importorskip("fastapi")
        from starlette.testclient import TestClient

        from rvstudio.webserver import build_app
        del fastapi
        client = TestClient(build_app())
        with client.websocket_connect("/ws") as ws:
            def req(op, **params):
                ws.send_text(json.dumps({"id": 7, "op": op, **params}))
                while True:
                    msg = json.loads(ws.receive_text())
                    if "event" not in msg:
                        return msg

            hello = req("hello")
            assert hello["ok"] and hello["result"]["version"] == 1
            req("load", text="addi x1, x2, -121")
            req("control", command="reset")
            step = req("control", command="step")
            assert step["result"]["changes"]["registers"] == [1]

    def test_static_frontend_served_when_built(self):
        pytest.importorskip("fastapi")
        from starlette.testclient import TestClient

        from rvstudio.webserver import FRONTEND_DIST, build_app
        if not FRONTEND_DIST.is_dir():
            pytest.skip("frontend not built")
        client = TestClient(build_app())
        index = client.get("/")
        assert index.status_code == 200
        assert "app.js" in index.text
