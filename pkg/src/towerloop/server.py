"""Network front door: HTTP for the kiosk app and state, WebSocket for roles.

One process, one port. Every inbound frame is funneled into the
orchestrator from the single asyncio loop, which gives the required total
order over events without locks. Video files never cross this wire; the
display reads them from its shared asset directory.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
import time
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse

from .errors import DuplicateRole, EngineError, RoleViolation, SchemaViolation
from .orchestrator import Orchestrator
from .protocol import DISPLAY, KIOSK

logger = logging.getLogger(__name__)

TICK_INTERVAL_S = 0.25

_FALLBACK_INDEX = """<!doctype html>
<html><head><meta charset="utf-8"><title>towerloop</title></head>
<body><h1>towerloop control server</h1>
<p>No kiosk bundle found. Engine state: <a href="/api/state">/api/state</a></p>
</body></html>
"""


def now_ms() -> int:
    return time.monotonic_ns() // 1_000_000


class ConnectionRegistry:
    """Active sockets by role; kiosk and display are single-occupancy."""

    def __init__(self) -> None:
        self.kiosk: WebSocket | None = None
        self.display: WebSocket | None = None
        self.admins: list[WebSocket] = []

    def attach(self, role: str, ws: WebSocket) -> None:
        if role == KIOSK:
            self.kiosk = ws
        elif role == DISPLAY:
            self.display = ws
        else:
            self.admins.append(ws)

    def detach(self, role: str, ws: WebSocket) -> None:
        if role == KIOSK and self.kiosk is ws:
            self.kiosk = None
        elif role == DISPLAY and self.display is ws:
            self.display = None
        elif ws in self.admins:
            self.admins.remove(ws)

    def targets(self, role: str) -> list[WebSocket]:
        if role == KIOSK:
            return [self.kiosk] if self.kiosk else []
        if role == DISPLAY:
            return [self.display] if self.display else []
        return list(self.admins)


def build_app(
    engine: Orchestrator,
    pages_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    registry = ConnectionRegistry()

    async def fan_out(outbound: list[tuple[str, dict]]) -> None:
        for target, msg in outbound:
            for ws in registry.targets(target):
                try:
                    await ws.send_text(json.dumps(msg, ensure_ascii=False))
                except Exception:  # connection died mid-send; reaper handles it
                    logger.exception("send to %s failed", target)

    async def tick_loop() -> None:
        while True:
            await asyncio.sleep(TICK_INTERVAL_S)
            try:
                await fan_out(engine.tick(now_ms()))
            except Exception:
                logger.exception("engine tick failed")

    @contextlib.asynccontextmanager
    async def lifespan(_app: FastAPI):
        ticker = asyncio.create_task(tick_loop())
        try:
            yield
        finally:
            ticker.cancel()

    app = FastAPI(title="towerloop", lifespan=lifespan)
    app.state.engine = engine
    app.state.registry = registry

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"ok": True}

    @app.get("/api/state", response_model=None)
    async def api_state():
        return JSONResponse(engine.snapshot(now_ms()))

    @app.get("/", response_model=None)
    async def index():
        if static_dir:
            candidate = Path(static_dir) / "index.html"
            if candidate.is_file():
                return FileResponse(candidate)
        return HTMLResponse(_FALLBACK_INDEX)

    if pages_dir:

        @app.get("/pages/{name:path}", response_model=None)
        async def page_image(name: str):
            root = Path(pages_dir).resolve()
            candidate = (root / name).resolve()
            if not candidate.is_file() or root not in candidate.parents:
                return JSONResponse({"error": "not found"}, status_code=404)
            return FileResponse(candidate)

    if static_dir:
        # Registered after the API routes, so it only catches leftovers;
        # lets the kiosk bundle use plain relative asset paths.

        @app.get("/{name:path}", response_model=None)
        async def static_file(name: str):
            root = Path(static_dir).resolve()
            candidate = (root / name).resolve()
            if not candidate.is_file() or root not in candidate.parents:
                return JSONResponse({"error": "not found"}, status_code=404)
            return FileResponse(candidate)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        role: str | None = None
        try:
            hello_raw = await ws.receive_text()
            try:
                hello = json.loads(hello_raw)
            except json.JSONDecodeError:
                await ws.close(code=1002, reason="hello must be JSON")
                return
            try:
                claimed = hello.get("body", {}).get("role")
                outbound = engine.connect(claimed, hello, now_ms())
            except (SchemaViolation, RoleViolation, DuplicateRole) as exc:
                await ws.close(code=1008, reason=str(exc))
                return
            role = claimed
            registry.attach(role, ws)
            await fan_out(outbound)

            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    logger.warning("%s sent non-JSON frame; ignored", role)
                    continue
                try:
                    await fan_out(engine.handle_message(role, msg, now_ms()))
                except (SchemaViolation, RoleViolation) as exc:
                    # Reject the message, keep the connection.
                    logger.warning("%s message rejected: %s", role, exc)
                except EngineError:
                    logger.exception("%s message failed", role)
        except WebSocketDisconnect:
            pass
        finally:
            if role:
                registry.detach(role, ws)
                engine.disconnect(role)

    return app
