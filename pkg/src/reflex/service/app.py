"""FastAPI application: REST endpoints over the core operations plus
the live-session websocket.

One websocket connection is one session.  The reader loop doubles as
the timer driver: while waiting for the next client frame it times out
exactly when the engine's earliest pending deadline/utterance timer is
due in session time, advances the engine to that point, and streams
whatever events were produced.  Engine errors surface as error events
and close the connection; they never take the service down.
"""

from __future__ import annotations

import asyncio
import dataclasses
import json
import time

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from pydantic import ValidationError

from ..config import SessionConfig, Task, load_bundle
from ..errors import ReflexError
from .live import DEFAULT_SESSIONS_DIR, LiveSession, sessions_dir
from .ops import run_eval, run_generate, run_replay, run_train
from .schemas import (
    ClientEnvelope,
    EvalRequest,
    EvalResponse,
    GenerateRequest,
    GenerateResponse,
    HealthResponse,
    ReplayRequest,
    ReplayResponse,
    StartMsg,
    TrainRequest,
    TrainResponse,
)


def create_app(
    config: SessionConfig | None = None,
    sessions_base: str = DEFAULT_SESSIONS_DIR,
    ui_dir: str | None = None,
) -> FastAPI:
    base_config = config or SessionConfig()
    bundles = {
        task: load_bundle(dataclasses.replace(base_config, task=task)) for task in Task
    }
    app = FastAPI(title="reflex", version="0.1.0")
    app.state.open_sessions = 0

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", open_sessions=app.state.open_sessions)

    @app.get("/config")
    def get_config() -> dict:
        cfg = dataclasses.asdict(base_config)
        return {k: str(v) if not isinstance(v, (int, float, bool, dict)) else v
                for k, v in cfg.items()}

    @app.post("/replay", response_model=ReplayResponse)
    def replay(req: ReplayRequest) -> ReplayResponse:
        return run_replay(req)

    @app.post("/eval", response_model=EvalResponse)
    def eval_log(req: EvalRequest) -> EvalResponse:
        return run_eval(req)

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest) -> GenerateResponse:
        return run_generate(req)

    @app.post("/train", response_model=TrainResponse)
    def train(req: TrainRequest) -> TrainResponse:
        return run_train(req)

    @app.websocket("/ws/session")
    async def ws_session(ws: WebSocket) -> None:
        await ws.accept()
        session: LiveSession | None = None
        app.state.open_sessions += 1
        # The receive task survives timer wakes; cancelling a pending
        # receive on timeout could silently drop a client frame that
        # arrives at that exact moment.
        recv_task: asyncio.Task | None = None

        async def send(obj: dict) -> None:
            await ws.send_text(json.dumps(obj, separators=(",", ":"), ensure_ascii=False))

        async def send_all(events: list[dict]) -> None:
            for e in events:
                await send(e)

        try:
            while True:
                timeout = None
                if session is not None:
                    timer_t = session.next_timer_ms()
                    if timer_t is not None:
                        timeout = max(0.0, (timer_t - session.now_ms()) / 1000.0)
                if recv_task is None:
                    recv_task = asyncio.ensure_future(ws.receive_text())
                done, _ = await asyncio.wait({recv_task}, timeout=timeout)
                if not done:
                    assert session is not None
                    timer_t = session.next_timer_ms()
                    if timer_t is not None:
                        await send_all(session.wake(timer_t))
                    continue
                raw = recv_task.result()  # raises WebSocketDisconnect on close
                recv_task = None

                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError:
                    await send({"ev": "error", "code": "bad_json",
                                "msg": "message is not valid JSON"})
                    break
                try:
                    msg = ClientEnvelope(msg=obj).msg
                except ValidationError as exc:
                    await send({"ev": "error", "code": "bad_message",
                                "msg": exc.errors()[0].get("msg", "invalid message")})
                    break

                if session is None:
                    if not isinstance(msg, StartMsg):
                        await send({"ev": "error", "code": "not_started",
                                    "msg": "first message must be op=start"})
                        break
                    session = LiveSession(bundles[Task(msg.task)], sessions_dir(sessions_base))
                    await send_all(session.engine.pop_events())
                    continue

                if isinstance(msg, StartMsg):
                    await send({"ev": "error", "code": "already_started",
                                "msg": "session already started"})
                    break
                events = session.handle(msg)
                await send_all(events)
                if session.closed:
                    break
        except WebSocketDisconnect:
            pass
        except ReflexError as exc:
            try:
                await send({"ev": "error", "code": "engine_error", "msg": str(exc)})
            except Exception:
                pass
        finally:
            if recv_task is not None and not recv_task.done():
                recv_task.cancel()
            if session is not None and not session.closed:
                session.finalize()
            app.state.open_sessions -= 1
            try:
                await ws.close()
            except Exception:
                pass

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
