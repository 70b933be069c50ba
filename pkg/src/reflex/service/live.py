"""Live session state: one engine per connection, with persistence.

Client-supplied timestamps are trusted (the UI simulates speech cadence
with them) but clamped to stay monotone and to never land behind a
boundary the engine has already fired; a clamp produces a warning event
instead of a protocol error.  On close, the (clamped) event stream and
the decision log are persisted so the session can be replayed through
the harness byte-for-byte.
"""

from __future__ import annotations

import itertools
import json
import os
from pathlib import Path

from ..config import ResourceBundle, Task
from ..engine import SessionEngine
from ..interview import session_report
from ..events import (
    DialogueEvent,
    behavior as behavior_event,
    vad_off,
    vad_on,
    word as word_event,
)
from ..harness import write_log
from ..events import write_corpus
from .schemas import BehaviorMsg, EndMsg, StartMsg, VadMsg, WordMsg

DEFAULT_SESSIONS_DIR = "sessions"
_session_counter = itertools.count(1)


def sessions_dir(default: str | os.PathLike = DEFAULT_SESSIONS_DIR) -> Path:
    return Path(os.environ.get("REFLEX_LOG_DIR", str(default)))


class LiveSession:
    def __init__(self, bundle: ResourceBundle, base_dir: Path):
        self.bundle = bundle
        self.engine = SessionEngine(bundle)
        self.events: list[DialogueEvent] = []
        self.session_id = f"{bundle.config.task.value}-{next(_session_counter):06d}"
        self.dir = base_dir / self.session_id
        self.closed = False
        self.engine.start()

    # ------------------------------------------------------------------

    def clamp(self, t: int) -> tuple[int, bool]:
        floor = self.engine.min_next_event_t
        if t < floor:
            return floor, True
        return t, False

    def handle(self, msg) -> list[dict]:
        """Apply one client message; returns server events to send."""
        out: list[dict] = []
        if isinstance(msg, StartMsg):
            out.append({"ev": "error", "code": "already_started",
                        "msg": "session already started"})
            return out
        if isinstance(msg, EndMsg):
            out.extend(self.finalize())
            return out

        t, clamped = self.clamp(msg.t)
        if clamped:
            out.append({
                "ev": "error", "code": "time_clamped",
                "msg": f"non-monotone t={msg.t} clamped to {t}",
            })
        if isinstance(msg, VadMsg):
            event = vad_on(t) if msg.on else vad_off(t)
        elif isinstance(msg, WordMsg):
            event = word_event(t, msg.surface, msg.pos, max(msg.t_end, t))
        elif isinstance(msg, BehaviorMsg):
            event = behavior_event(t, msg.kind)
        else:
            out.append({"ev": "error", "code": "bad_op", "msg": f"unsupported op {msg!r}"})
            return out
        self.events.append(event)
        self.engine.ingest(event)
        out.extend(self.engine.pop_events())
        return out

    def wake(self, t_ms: int) -> list[dict]:
        """Wall timer fired: advance the session clock to t_ms."""
        self.engine.advance_to(t_ms)
        return self.engine.pop_events()

    def next_timer_ms(self) -> int | None:
        return self.engine.next_timer_ms()

    def now_ms(self) -> int:
        return self.engine.timeline.now_ms

    def finalize(self) -> list[dict]:
        if self.closed:
            return []
        self.closed = True
        self.engine.finalize()
        out = self.engine.pop_events()
        self.persist()
        return out

    def persist(self) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        write_corpus(self.dir / "events.jsonl", self.events)
        write_log(self.dir / "decisions.jsonl", self.engine.log)
        if self.bundle.config.task is Task.INTERVIEW:
            report = session_report(self.bundle.script, self.engine.interview)
            with open(self.dir / "interview_report.json", "w", encoding="utf-8") as fp:
                json.dump(report, fp, sort_keys=True, indent=1)
                fp.write("\n")
