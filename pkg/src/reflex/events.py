"""Dialogue event atoms and the line-oriented corpus format.

A corpus file is UTF-8 text with one JSON object per line.  Every line
carries "t" (integer milliseconds since session start) and "type"; the
remaining keys depend on the type.  Unknown keys are ignored so corpora
can carry annotations this engine does not consume; an unknown type is
an error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Iterator, TextIO

from .errors import CorpusParseError, MalformedPayload


class EventKind(str, Enum):
    VAD_ON = "vad_on"
    VAD_OFF = "vad_off"
    WORD = "word"
    PROSODY = "prosody"
    BEHAVIOR = "behavior"
    GOLD_BACKCHANNEL = "gold_bc"
    GOLD_TURN = "gold_turn"


class BehaviorKind(str, Enum):
    LAUGH = "laugh"
    NOD = "nod"
    GAZE_CONTACT = "gaze_contact"
    USER_BACKCHANNEL = "user_backchannel"


@dataclass(frozen=True)
class Word:
    surface: str
    pos: str
    end_t_ms: int


@dataclass(frozen=True)
class ProsodyFrame:
    f0_hz: float  # 0 means unvoiced
    power_db: float


@dataclass(frozen=True)
class GoldBackchannel:
    form: str


@dataclass(frozen=True)
class GoldTurn:
    trp: bool
    taken: bool


@dataclass(frozen=True)
class DialogueEvent:
    """One timestamped input atom.

    ``payload`` is the kind-specific record (None for VAD edges) and is
    validated against ``kind`` at construction time.
    """

    t_ms: int
    kind: EventKind
    payload: Any = field(default=None)

    _PAYLOAD_TYPES = {
        EventKind.VAD_ON: type(None),
        EventKind.VAD_OFF: type(None),
        EventKind.WORD: Word,
        EventKind.PROSODY: ProsodyFrame,
        EventKind.BEHAVIOR: BehaviorKind,
        EventKind.GOLD_BACKCHANNEL: GoldBackchannel,
        EventKind.GOLD_TURN: GoldTurn,
    }

    def __post_init__(self):
        if self.t_ms < 0:
            raise MalformedPayload(f"negative timestamp {self.t_ms}")
        expected = self._PAYLOAD_TYPES[self.kind]
        if not isinstance(self.payload, expected):
            raise MalformedPayload(
                f"{self.kind.value} payload must be {expected.__name__}, "
                f"got {type(self.payload).__name__}"
            )
        if self.kind is EventKind.WORD and self.payload.end_t_ms < self.t_ms:
            raise MalformedPayload(
                f"word ends at {self.payload.end_t_ms} before it starts at {self.t_ms}"
            )


def vad_on(t_ms: int) -> DialogueEvent:
    return DialogueEvent(t_ms, EventKind.VAD_ON)


def vad_off(t_ms: int) -> DialogueEvent:
    return DialogueEvent(t_ms, EventKind.VAD_OFF)


def word(t_ms: int, surface: str, pos: str, end_t_ms: int) -> DialogueEvent:
    return DialogueEvent(t_ms, EventKind.WORD, Word(surface, pos, end_t_ms))


def prosody(t_ms: int, f0_hz: float, power_db: float) -> DialogueEvent:
    return DialogueEvent(t_ms, EventKind.PROSODY, ProsodyFrame(f0_hz, power_db))


def behavior(t_ms: int, kind: BehaviorKind | str) -> DialogueEvent:
    return DialogueEvent(t_ms, EventKind.BEHAVIOR, BehaviorKind(kind))


def gold_backchannel(t_ms: int, form: str) -> DialogueEvent:
    return DialogueEvent(t_ms, EventKind.GOLD_BACKCHANNEL, GoldBackchannel(form))


def gold_turn(t_ms: int, trp: bool, taken: bool) -> DialogueEvent:
    return DialogueEvent(t_ms, EventKind.GOLD_TURN, GoldTurn(trp, taken))


def event_to_obj(e: DialogueEvent) -> dict:
    """Serialize an event to its corpus-line dict."""
    obj: dict[str, Any] = {"t": e.t_ms, "type": e.kind.value}
    if e.kind is EventKind.WORD:
        obj.update(surface=e.payload.surface, pos=e.payload.pos, t_end=e.payload.end_t_ms)
    elif e.kind is EventKind.PROSODY:
        obj.update(f0=e.payload.f0_hz, power=e.payload.power_db)
    elif e.kind is EventKind.BEHAVIOR:
        obj.update(kind=e.payload.value)
    elif e.kind is EventKind.GOLD_BACKCHANNEL:
        obj.update(form=e.payload.form)
    elif e.kind is EventKind.GOLD_TURN:
        obj.update(trp=e.payload.trp, taken=e.payload.taken)
    return obj


def event_from_obj(obj: dict) -> DialogueEvent:
    """Parse one corpus-line dict into an event.

    Raises CorpusParseError on missing/ill-typed required keys or an
    unknown type; extra keys are ignored.
    """
    try:
        t = int(obj["t"])
        type_name = obj["type"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusParseError(f"missing or invalid 't'/'type': {exc}") from exc
    try:
        kind = EventKind(type_name)
    except ValueError:
        raise CorpusParseError(f"unknown event type {type_name!r}") from None
    try:
        if kind is EventKind.VAD_ON:
            return vad_on(t)
        if kind is EventKind.VAD_OFF:
            return vad_off(t)
        if kind is EventKind.WORD:
            return word(t, str(obj["surface"]), str(obj["pos"]), int(obj["t_end"]))
        if kind is EventKind.PROSODY:
            return prosody(t, float(obj["f0"]), float(obj["power"]))
        if kind is EventKind.BEHAVIOR:
            return behavior(t, str(obj["kind"]))
        if kind is EventKind.GOLD_BACKCHANNEL:
            return gold_backchannel(t, str(obj["form"]))
        return gold_turn(t, bool(obj["trp"]), bool(obj["taken"]))
    except (KeyError, TypeError, ValueError, MalformedPayload) as exc:
        raise CorpusParseError(f"bad {type_name} payload: {exc}") from exc


def read_corpus(fp: TextIO) -> Iterator[DialogueEvent]:
    """Yield events from a corpus stream; blank lines are skipped."""
    for line_no, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusParseError(f"invalid JSON: {exc}", line_no) from exc
        if not isinstance(obj, dict):
            raise CorpusParseError("line is not a JSON object", line_no)
        try:
            yield event_from_obj(obj)
        except CorpusParseError as exc:
            raise CorpusParseError(str(exc), line_no) from exc


def load_corpus(path) -> list[DialogueEvent]:
    with open(path, encoding="utf-8") as fp:
        return list(read_corpus(fp))


def write_corpus(path, events: Iterable[DialogueEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for e in events:
            fp.write(json.dumps(event_to_obj(e), sort_keys=True, separators=(",", ":")))
            fp.write("\n")
