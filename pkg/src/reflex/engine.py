"""Per-session decision engine shared by corpus replay and live sessions.

Time is event-driven.  Between ingested events the engine owes work at
interior boundaries: decision frames (every frame_period_ms), the
engagement cadence, the FSTTM wait deadline, and the scheduled end of a
system utterance.  Boundaries fire strictly before the next event's
timestamp; at equal times events win, and simultaneous boundaries
resolve in a fixed order (utterance end, deadline, frame, engagement).
This makes the decision log a pure function of (event stream, config,
models), which is what live-vs-replay parity rests on.

Live callers additionally use ``next_timer_ms`` to map pending
deadlines onto wall-clock timers and ``min_next_event_t`` to clamp
client timestamps so that late arrivals can never travel behind an
already-fired boundary.
"""

from __future__ import annotations

import hashlib
import json
import time as _time

from .backchannel import BcGateState, decide, predict_timing, select_form
from .config import ResourceBundle, Task
from .engagement import BehaviorWindow, estimate
from .errors import MalformedPayload
from .events import DialogueEvent, EventKind
from .features import form_features, take_context, trp_features
from .interview import (
    AnswerComplete,
    AskFollowup,
    End,
    FollowupAnswered,
    InterviewState,
    Phase as InterviewPhase,
    step_interview,
)
from .listener import ResponsePlanner
from .prosody import ProsodyTrack, features_at
from .timeline import SessionTimeline, TimedWord
from .turntaking import (
    FsttmState,
    TurnAction,
    TurnInput,
    TurnState,
    decide_take_turn,
    detect_trp,
    fsttm_step,
)

# Fixed resolution order for boundaries that share a timestamp.
_B_UTTERANCE, _B_DEADLINE, _B_FRAME, _B_ENGAGEMENT = 0, 1, 2, 3


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha1(blob.encode("utf-8")).hexdigest()[:12]


def canonical_record(record: dict) -> str:
    """Canonical one-line serialization used for byte-compared logs."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class SessionEngine:
    def __init__(self, bundle: ResourceBundle, collect_timing: bool = False):
        self.bundle = bundle
        cfg = bundle.config
        self.cfg = cfg
        self.timeline = SessionTimeline(cfg.ipu_gap_ms)
        self.track = ProsodyTrack(cfg.frame_period_ms)
        self.window = BehaviorWindow(cfg.engagement_window_ms)
        self.turn = TurnState()
        self.turn_cfg = cfg.turn_config()
        self.planner = ResponsePlanner(
            bundle.templates, bundle.lexicon, bundle.stop_nouns, cfg.tau_s
        )
        self.interview = InterviewState()
        self.log: list[dict] = []
        self.outbox: list[dict] = []
        self.min_next_event_t = 0

        self._next_frame_ms = 0
        self._next_engagement_ms = cfg.engagement_period_ms
        self._utterance_end_ms: int | None = None
        self._system_speaking = False
        self._last_bc_t_ms: int | None = None
        self._last_system_spoke_ms: int | None = None
        self._answer_tokens: list[TimedWord] = []
        self._low_since_ms: int | None = None
        self._prefer_elaborating = False
        self._started = False
        self._finalized = False

        self.collect_timing = collect_timing
        self.frame_costs: list[float] = []

    # ------------------------------------------------------------------
    # Public drive surface

    def start(self) -> None:
        """Session opening: the interviewer asks its first question."""
        if self._started:
            return
        self._started = True
        if self.cfg.task is Task.INTERVIEW:
            self.interview, action = step_interview(
                self.bundle.script, self.interview, stoplist=self.bundle.stop_nouns
            )
            self._emit_question(0, action, is_followup=False)

    def ingest(self, e: DialogueEvent) -> None:
        self.start()
        self._process_due(e.t_ms, inclusive=False)
        self._route_event(e)
        self.min_next_event_t = max(self.min_next_event_t, e.t_ms)

    def advance_to(self, t_ms: int) -> None:
        """Process all boundaries due up to and including t_ms."""
        self.start()
        self._process_due(t_ms, inclusive=True)
        self.timeline.advance(t_ms)

    def finalize(self) -> None:
        """Drain trailing boundaries and pending timers after the last event."""
        self.start()
        if self._finalized:
            return
        self._process_due(self.timeline.now_ms, inclusive=True)
        while True:
            pending = [t for t in (self._utterance_end_ms, self.turn.wait_deadline_ms)
                       if t is not None]
            if not pending:
                break
            self._process_due(min(pending), inclusive=True)
        self._finalized = True

    def pop_events(self) -> list[dict]:
        out, self.outbox = self.outbox, []
        return out

    def next_timer_ms(self) -> int | None:
        """Earliest pending deadline/utterance timer for live scheduling."""
        pending = [t for t in (self._utterance_end_ms, self.turn.wait_deadline_ms)
                   if t is not None]
        return min(pending) if pending else None

    # ------------------------------------------------------------------
    # Boundary machinery

    def _pending_boundaries(self) -> list[tuple[int, int]]:
        out = [(self._next_frame_ms, _B_FRAME), (self._next_engagement_ms, _B_ENGAGEMENT)]
        if self._utterance_end_ms is not None:
            out.append((self._utterance_end_ms, _B_UTTERANCE))
        if self.turn.wait_deadline_ms is not None:
            out.append((self.turn.wait_deadline_ms, _B_DEADLINE))
        return out

    def _process_due(self, limit_ms: int, inclusive: bool) -> None:
        while True:
            t, kind = min(self._pending_boundaries(), key=lambda b: (b[0], b[1]))
            if t > limit_ms or (t == limit_ms and not inclusive):
                return
            self.timeline.advance(t)
            if kind == _B_UTTERANCE:
                self._on_utterance_end(t)
            elif kind == _B_DEADLINE:
                self._on_deadline(t)
            elif kind == _B_FRAME:
                self._on_frame(t)
                self._next_frame_ms += self.cfg.frame_period_ms
            else:
                self._on_engagement(t)
                self._next_engagement_ms += self.cfg.engagement_period_ms
            self.min_next_event_t = max(self.min_next_event_t, t + 1)

    # ------------------------------------------------------------------
    # Event routing

    def _route_event(self, e: DialogueEvent) -> None:
        if e.kind is EventKind.VAD_ON:
            was_on = self.timeline.vad_is_on
            self.timeline.ingest(e)
            if not was_on:
                self._turn_input(e.t_ms, TurnInput.USER_VAD_ON)
        elif e.kind is EventKind.VAD_OFF:
            was_on = self.timeline.vad_is_on
            self.timeline.ingest(e)
            if was_on:
                self._on_user_vadoff(e.t_ms)
        elif e.kind is EventKind.WORD:
            self.timeline.ingest(e)
            if self.cfg.task is Task.INTERVIEW:
                w = e.payload
                self._answer_tokens.append(TimedWord(e.t_ms, w.surface, w.pos, w.end_t_ms))
        elif e.kind is EventKind.PROSODY:
            self.timeline.ingest(e)
            self.track.add(e.t_ms, e.payload.f0_hz, e.payload.power_db)
        elif e.kind is EventKind.BEHAVIOR:
            self.timeline.ingest(e)
            self.window.add(e.t_ms, e.payload)
        elif e.kind in (EventKind.GOLD_BACKCHANNEL, EventKind.GOLD_TURN):
            self.timeline.ingest(e)  # annotations ride along, decisions ignore them
        else:
            raise MalformedPayload(f"unroutable event kind {e.kind}")

    def _on_user_vadoff(self, t_ms: int) -> None:
        if self.turn.fsttm is FsttmState.USER_TURN:
            decision = self._trp_decision(t_ms)
            self._turn_input(t_ms, TurnInput.USER_VAD_OFF, decision)
            ipu = self.timeline.current_ipu()
            if (
                self.turn.fsttm is FsttmState.FREE_AFTER_USER
                and ipu is not None
                and ipu.tokens
                and ipu.tokens[-1].surface.casefold() in self.bundle.fillers
            ):
                self._turn_input(t_ms, TurnInput.FILLER_DETECTED)
        elif self.turn.fsttm in (FsttmState.OVERLAP_USER_HOLDS, FsttmState.OVERLAP_SYSTEM_HOLDS):
            self._turn_input(t_ms, TurnInput.USER_VAD_OFF)

    def _trp_decision(self, t_ms: int):
        ipu = self.timeline.current_ipu()
        frame = None
        if self.track.is_fresh(t_ms):
            frame = features_at(self.track, self.timeline, t_ms)
        feats = trp_features(ipu, frame, self.bundle.fillers)
        p_trp = detect_trp(self.bundle.trp_model, ipu, feats, vad_off_seen=True)
        since_system = (
            None if self._last_system_spoke_ms is None
            else t_ms - self._last_system_spoke_ms
        )
        ctx = take_context(ipu, since_system, self.turn_cfg.hold_turn_on_overlap)
        decision = decide_take_turn(self.bundle.take_model, p_trp, ctx)
        self._log(t_ms, "turntaking", {
            "kind": "trp",
            "p_trp": decision.p_trp,
            "p_take_given_trp": decision.p_take_given_trp,
            "p_take": decision.p_take,
            "digest": _digest([feats.vector, ctx.vector]),
        })
        return decision

    def _turn_input(self, t_ms: int, inp: TurnInput, decision=None) -> None:
        self.turn, action = fsttm_step(self.turn, inp, t_ms, decision, self.turn_cfg)
        self._log(t_ms, "turntaking", {
            "kind": "transition",
            "input": inp.value,
            "state": self.turn.fsttm.value,
            "action": action.value,
            "deadline": self.turn.wait_deadline_ms,
            "digest": _digest([inp.value, self.turn.fsttm.value]),
        })
        self.outbox.append({"ev": "turn_state", "state": self.turn.fsttm.value, "t": t_ms})
        if action is TurnAction.TAKE_TURN:
            self._respond(t_ms)
        elif action is TurnAction.BACK_OFF:
            # System yields: truncate the utterance immediately.
            self._utterance_end_ms = None
            self._system_speaking = False
            self._last_system_spoke_ms = t_ms
            self._turn_input(t_ms, TurnInput.SYSTEM_UTTERANCE_END)

    # ------------------------------------------------------------------
    # Boundary handlers

    def _on_frame(self, t_ms: int) -> None:
        t0 = _time.perf_counter() if self.collect_timing else 0.0
        if self.track.is_fresh(t_ms):
            feats = features_at(self.track, self.timeline, t_ms)
            prob = predict_timing(self.bundle.bc_policy, feats)
            gate = BcGateState(
                now_ms=t_ms,
                last_bc_t_ms=self._last_bc_t_ms,
                system_speaking=self._system_speaking,
            )
            triggered = decide(self.bundle.bc_policy, prob, gate)
            record = {
                "kind": "frame",
                "p": prob,
                "triggered": triggered,
                "digest": _digest(feats.vector),
            }
            if triggered:
                self._last_bc_t_ms = t_ms
                # Form selection listens to how the utterance itself
                # sounded: anchor the prosodic window at the IPU end,
                # not at the trigger frame inside the pause.
                ipu = self.timeline.current_ipu()
                form_frame = feats
                if ipu is not None and self.track.is_fresh(ipu.end_ms):
                    form_frame = features_at(self.track, self.timeline, ipu.end_ms)
                form = select_form(
                    self.bundle.bc_policy,
                    form_features(ipu, form_frame, self.bundle.fillers),
                )
                record["form"] = form.label
                record["text"] = form.text
                self.outbox.append(
                    {"ev": "backchannel", "form": form.label, "text": form.text, "t": t_ms}
                )
            self._log(t_ms, "backchannel", record)
        if self.collect_timing:
            self.frame_costs.append(_time.perf_counter() - t0)

    def _on_engagement(self, t_ms: int) -> None:
        self.window.advance(t_ms)
        est = estimate(self.bundle.engagement_model, self.window, self.bundle.baselines)
        self._log(t_ms, "engagement", {
            "kind": "estimate",
            "score": est.score,
            "counts": est.counts,
            "digest": _digest(est.counts),
        })
        self.outbox.append({"ev": "engagement", "score": est.score, "t": t_ms})
        if est.score < self.cfg.low_engagement_threshold:
            if self._low_since_ms is None:
                self._low_since_ms = t_ms
            elif t_ms - self._low_since_ms >= self.cfg.low_engagement_dwell_ms:
                self._prefer_elaborating = True
        else:
            self._low_since_ms = None
            self._prefer_elaborating = False

    def _on_deadline(self, t_ms: int) -> None:
        self._turn_input(t_ms, TurnInput.DEADLINE_EXPIRED)

    def _on_utterance_end(self, t_ms: int) -> None:
        self._utterance_end_ms = None
        self._system_speaking = False
        self._last_system_spoke_ms = t_ms
        self._turn_input(t_ms, TurnInput.SYSTEM_UTTERANCE_END)

    # ------------------------------------------------------------------
    # System utterances

    def _respond(self, t_ms: int) -> None:
        if self.cfg.task is Task.INTERVIEW:
            self._interview_respond(t_ms)
            return
        ipu = self.timeline.current_ipu()
        tokens = ipu.tokens if ipu is not None else ()
        plan = self.planner.respond(
            tokens, t_ms,
            prefer_elaborating=self._prefer_elaborating,
        )
        if self._prefer_elaborating:
            self._prefer_elaborating = False
            self._low_since_ms = None
        self._log(t_ms, "listener", {
            "kind": "response",
            "response_kind": plan.kind.value,
            "text": plan.text,
            "provenance": plan.provenance,
            "digest": _digest([t.surface for t in tokens]),
        })
        self.outbox.append(
            {"ev": "response", "kind": plan.kind.value, "text": plan.text, "t": t_ms}
        )
        self._begin_utterance(t_ms, plan.text)

    def _interview_respond(self, t_ms: int) -> None:
        tokens = tuple(self._answer_tokens)
        self._answer_tokens = []
        if self.interview.phase is InterviewPhase.DONE:
            # Script exhausted but the user kept talking: release the
            # floor without a question so the session stays live.
            self._turn_input(t_ms, TurnInput.SYSTEM_UTTERANCE_START)
            self._turn_input(t_ms, TurnInput.SYSTEM_UTTERANCE_END)
            return
        event_cls = FollowupAnswered if self.interview.pending_is_followup else AnswerComplete
        self.interview, action = step_interview(
            self.bundle.script, self.interview, event_cls(tokens),
            stoplist=self.bundle.stop_nouns,
        )
        if isinstance(action, End):
            self._log(t_ms, "interview", {"kind": "end", "digest": _digest("end")})
            # Zero-length closing: release the floor immediately.
            self._turn_input(t_ms, TurnInput.SYSTEM_UTTERANCE_START)
            self._turn_input(t_ms, TurnInput.SYSTEM_UTTERANCE_END)
            return
        self._emit_question(t_ms, action, is_followup=isinstance(action, AskFollowup))

    def _emit_question(self, t_ms: int, action, is_followup: bool) -> None:
        text = action.text
        self._log(t_ms, "interview", {
            "kind": "question",
            "question_kind": "followup" if is_followup else "base",
            "question_id": getattr(action, "question_id", None),
            "text": text,
            "digest": _digest(text),
        })
        self.outbox.append({"ev": "question", "text": text, "t": t_ms})
        self._begin_utterance(t_ms, text)

    def _begin_utterance(self, t_ms: int, text: str) -> None:
        self._turn_input(t_ms, TurnInput.SYSTEM_UTTERANCE_START)
        self._system_speaking = True
        self._last_system_spoke_ms = t_ms
        duration = self.cfg.utterance_min_ms + self.cfg.utterance_ms_per_char * len(text)
        self._utterance_end_ms = t_ms + duration

    # ------------------------------------------------------------------

    def _log(self, t_ms: int, module: str, record: dict) -> None:
        self.log.append({"t": t_ms, "module": module, **record})
