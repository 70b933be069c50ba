"""Session clock, event ordering, and IPU segmentation.

The session clock is event-driven: it advances when events are ingested
(or when the engine explicitly advances it to a frame boundary), never
from the wall clock, so replay and live sessions share one code path.
Late events are rejected rather than buffered to keep replay
deterministic.

User speech is segmented into inter-pausal units (IPUs): maximal speech
spans separated by silences of at least ``ipu_gap_ms``.  An IPU closes
once a VadOff has been observed and the clock has moved at least
``ipu_gap_ms`` past its end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import OutOfOrderEvent
from .events import DialogueEvent, EventKind, Word

DEFAULT_IPU_GAP_MS = 200


@dataclass(frozen=True)
class TimedWord:
    t_ms: int
    surface: str
    pos: str
    end_t_ms: int


@dataclass(frozen=True)
class Ipu:
    start_ms: int
    end_ms: int
    tokens: tuple[TimedWord, ...]
    closed: bool


@dataclass
class _Span:
    """Raw speech span bounded by VAD edges, before gap merging."""

    start_ms: int
    end_ms: int
    tokens: list[TimedWord] = field(default_factory=list)
    vad_closed: bool = False


def _attach_word(spans: list[_Span], vad_is_on: bool, t_ms: int, w: Word, gap_ms: int) -> None:
    tw = TimedWord(t_ms, w.surface, w.pos, w.end_t_ms)
    if vad_is_on and spans and not spans[-1].vad_closed:
        spans[-1].tokens.append(tw)
        # An open span's end tracks its words so far; VadOff may extend
        # it further.
        spans[-1].end_ms = max(spans[-1].end_ms, w.end_t_ms)
        return
    # Late ASR output shortly after VadOff extends the previous span;
    # a word with no speech span at all is itself evidence of speech.
    if spans and t_ms <= spans[-1].end_ms + gap_ms:
        spans[-1].tokens.append(tw)
        spans[-1].end_ms = max(spans[-1].end_ms, w.end_t_ms)
    else:
        spans.append(_Span(t_ms, w.end_t_ms, [tw], vad_closed=True))


def _spans_to_ipus(spans: list[_Span], gap_ms: int, now_ms: int) -> list[Ipu]:
    ipus: list[Ipu] = []
    group: list[_Span] = []
    for span in spans:
        if group and span.start_ms - group[-1].end_ms < gap_ms:
            group.append(span)
        else:
            if group:
                ipus.append(_group_to_ipu(group, gap_ms, now_ms))
            group = [span]
    if group:
        ipus.append(_group_to_ipu(group, gap_ms, now_ms))
    return ipus


def _group_to_ipu(group: list[_Span], gap_ms: int, now_ms: int) -> Ipu:
    end_ms = max(s.end_ms for s in group)
    tokens = tuple(tw for s in group for tw in s.tokens)
    closed = group[-1].vad_closed and (now_ms - end_ms >= gap_ms)
    return Ipu(group[0].start_ms, end_ms, tokens, closed)


class SessionTimeline:
    """Append-only event log plus derived IPU state for one session.

    Single-writer: all mutation happens from one logical thread of
    control per session.
    """

    def __init__(self, ipu_gap_ms: int = DEFAULT_IPU_GAP_MS):
        if ipu_gap_ms <= 0:
            raise ValueError("ipu_gap_ms must be positive")
        self.ipu_gap_ms = ipu_gap_ms
        self.events: list[DialogueEvent] = []
        self.now_ms = 0
        self.vad_is_on = False
        self.last_vadoff_ms: int | None = None
        self._spans: list[_Span] = []

    def ingest(self, e: DialogueEvent) -> "SessionTimeline":
        if e.t_ms < self.now_ms:
            raise OutOfOrderEvent(f"event at {e.t_ms} behind clock {self.now_ms}")
        self.events.append(e)
        self.now_ms = e.t_ms
        if e.kind is EventKind.VAD_ON:
            if not self.vad_is_on:
                self.vad_is_on = True
                self._spans.append(_Span(e.t_ms, e.t_ms))
        elif e.kind is EventKind.VAD_OFF:
            if self.vad_is_on:
                self.vad_is_on = False
                span = self._spans[-1]
                span.end_ms = max(e.t_ms, span.end_ms)
                span.vad_closed = True
                self.last_vadoff_ms = e.t_ms
        elif e.kind is EventKind.WORD:
            _attach_word(self._spans, self.vad_is_on, e.t_ms, e.payload, self.ipu_gap_ms)
        return self

    def advance(self, t_ms: int) -> None:
        """Move the clock forward without an event (frame boundaries)."""
        if t_ms > self.now_ms:
            self.now_ms = t_ms

    def ipus(self) -> list[Ipu]:
        return _spans_to_ipus(self._spans, self.ipu_gap_ms, self.now_ms)

    def last_closed_ipu(self) -> Ipu | None:
        for ipu in reversed(self.ipus()):
            if ipu.closed:
                return ipu
        return None

    def current_ipu(self) -> Ipu | None:
        """Most recent IPU whether or not it has closed."""
        ipus = self.ipus()
        return ipus[-1] if ipus else None

    def current_silence_ms(self, now_ms: int | None = None) -> int:
        """Milliseconds since the last VadOff; 0 while VAD is on.

        Before any speech the whole session counts as silence, so the
        value is the elapsed time since session start.
        """
        now = self.now_ms if now_ms is None else now_ms
        if self.vad_is_on:
            return 0
        if self.last_vadoff_ms is None:
            return now
        return max(0, now - self.last_vadoff_ms)


def ingest_event(timeline: SessionTimeline, e: DialogueEvent) -> SessionTimeline:
    return timeline.ingest(e)


def segment_ipus(
    events: list[DialogueEvent], ipu_gap_ms: int, now_ms: int | None = None
) -> list[Ipu]:
    """Segment a time-ordered event list into IPUs from scratch.

    ``now_ms`` defaults to the last event timestamp; pass the session
    clock explicitly to decide closedness of the trailing IPU.
    """
    spans: list[_Span] = []
    vad_is_on = False
    last_t = 0
    for e in events:
        last_t = max(last_t, e.t_ms)
        if e.kind is EventKind.VAD_ON:
            if not vad_is_on:
                vad_is_on = True
                spans.append(_Span(e.t_ms, e.t_ms))
        elif e.kind is EventKind.VAD_OFF:
            if vad_is_on:
                vad_is_on = False
                spans[-1].end_ms = max(e.t_ms, spans[-1].end_ms)
                spans[-1].vad_closed = True
        elif e.kind is EventKind.WORD:
            _attach_word(spans, vad_is_on, e.t_ms, e.payload, ipu_gap_ms)
    now = last_t if now_ms is None else now_ms
    return _spans_to_ipus(spans, ipu_gap_ms, now)


def current_silence_ms(timeline: SessionTimeline, now_ms: int) -> int:
    return timeline.current_silence_ms(now_ms)
