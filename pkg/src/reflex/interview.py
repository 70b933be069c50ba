"""Interviewer-side dialogue management.

A scripted list of base questions is augmented with dynamically
generated follow-ups from two sources: checklist gaps (content the
answer should have mentioned but did not) and keyword extraction from
the answer.  Checklist follow-ups outrank keyword follow-ups, and each
base question has a bounded follow-up budget; with a budget of zero the
manager degenerates to the fixed-script baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .errors import ConfigError, IllegalPhase

KEYWORD_FOLLOWUP_TEMPLATE = "Could you explain more about {X}?"

_NOUN_TAGS = frozenset({"NOUN", "PROPN"})


@dataclass(frozen=True)
class ChecklistItem:
    id: str
    description: str
    stems: tuple[str, ...]
    followup: str

    def __post_init__(self):
        if not self.stems:
            raise ValueError(f"checklist item {self.id}: matcher stems must be nonempty")
        if not self.followup:
            raise ValueError(f"checklist item {self.id}: follow-up template must be nonempty")


@dataclass(frozen=True)
class BaseQuestion:
    id: str
    text: str
    checklist: tuple[ChecklistItem, ...] = ()


@dataclass(frozen=True)
class InterviewScript:
    base_questions: tuple[BaseQuestion, ...]
    max_followups_per_base: int = 2

    def __post_init__(self):
        if not self.base_questions:
            raise ValueError("script needs at least one base question")
        ids = [q.id for q in self.base_questions]
        if len(set(ids)) != len(ids):
            raise ValueError("base question ids must be unique")
        if self.max_followups_per_base < 0:
            raise ValueError("max_followups_per_base must be >= 0")

    @classmethod
    def from_obj(cls, obj: dict) -> "InterviewScript":
        try:
            questions = tuple(
                BaseQuestion(
                    id=str(q["id"]),
                    text=str(q["text"]),
                    checklist=tuple(
                        ChecklistItem(
                            id=str(c["id"]),
                            description=str(c.get("description", c["id"])),
                            stems=tuple(str(s) for s in c["stems"]),
                            followup=str(c["followup"]),
                        )
                        for c in q.get("checklist", [])
                    ),
                )
                for q in obj["base_questions"]
            )
            return cls(questions, int(obj.get("max_followups_per_base", 2)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid interview script: {exc}") from exc


def load_script(path) -> InterviewScript:
    try:
        with open(path, encoding="utf-8") as fp:
            return InterviewScript.from_obj(json.load(fp))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load interview script {path}: {exc}") from exc


class Phase(str, Enum):
    ASKING = "asking"
    LISTENING = "listening"
    DONE = "done"


@dataclass(frozen=True)
class TranscriptEntry:
    question_id: str
    question_text: str
    is_followup: bool
    answer_tokens: tuple[str, ...]
    unmet_item_ids: tuple[str, ...]


@dataclass(frozen=True)
class InterviewState:
    current_base: int = 0
    followups_asked: int = 0
    transcript: tuple[TranscriptEntry, ...] = ()
    phase: Phase = Phase.ASKING
    pending_question: str | None = None
    pending_is_followup: bool = False


@dataclass(frozen=True)
class AnswerComplete:
    tokens: tuple


@dataclass(frozen=True)
class FollowupAnswered:
    tokens: tuple


@dataclass(frozen=True)
class AskBase:
    question_id: str
    text: str


@dataclass(frozen=True)
class AskFollowup:
    text: str


@dataclass(frozen=True)
class End:
    pass


def _surface(tok) -> str:
    return tok.surface if hasattr(tok, "surface") else tok[0]


def _pos(tok) -> str:
    return tok.pos if hasattr(tok, "pos") else tok[1]


def _stem_matched(stem: str, surfaces: list[str], joined: str) -> bool:
    stem = stem.casefold()
    if " " in stem:
        return stem in joined
    return any(s.startswith(stem) for s in surfaces)


def assess_checklist(
    answer_tokens: Sequence, items: Sequence[ChecklistItem]
) -> list[ChecklistItem]:
    """Items whose trigger stems never occur in the answer (case-folded
    stem match against token surfaces)."""
    surfaces = [_surface(t).casefold() for t in answer_tokens]
    joined = " ".join(surfaces)
    return [
        item
        for item in items
        if not any(_stem_matched(stem, surfaces, joined) for stem in item.stems)
    ]


def extract_keyword(
    answer_tokens: Sequence, stoplist: frozenset[str] = frozenset()
) -> str | None:
    """Most salient content noun: adjacent nouns merge into a compound,
    the longest surface wins, ties go to the rightmost occurrence."""
    compounds: list[str] = []
    current: list[str] = []
    for tok in answer_tokens:
        surface = _surface(tok)
        if _pos(tok).upper() in _NOUN_TAGS and surface.casefold() not in stoplist:
            current.append(surface)
        else:
            if current:
                compounds.append(" ".join(current))
            current = []
    if current:
        compounds.append(" ".join(current))
    best = None
    for surface in compounds:  # left to right, >= keeps the rightmost tie
        if best is None or len(surface) >= len(best):
            best = surface
    return best


def gen_followup(
    state: InterviewState,
    script: InterviewScript,
    unmet: Sequence[ChecklistItem],
    keyword: str | None,
) -> str | None:
    """Next follow-up question text, or None when the manager should
    advance to the next base question.  Checklist gaps win over
    keywords; an exhausted budget always advances."""
    if state.followups_asked >= script.max_followups_per_base:
        return None
    if unmet:
        return unmet[0].followup
    if keyword:
        return KEYWORD_FOLLOWUP_TEMPLATE.replace("{X}", keyword)
    return None


def step_interview(
    script: InterviewScript,
    state: InterviewState,
    event: AnswerComplete | FollowupAnswered | None = None,
    stoplist: frozenset[str] = frozenset(),
) -> tuple[InterviewState, AskBase | AskFollowup | End]:
    """Advance the interview one step; pure.

    A fresh state (phase Asking, no event) emits the first base
    question.  In phase Listening a completed answer either triggers a
    follow-up or advances the script; after the last base question's
    budget is consumed the interview ends.
    """
    if state.phase is Phase.DONE:
        raise IllegalPhase("interview already finished")

    if state.phase is Phase.ASKING:
        if event is not None:
            raise IllegalPhase("no question pending; cannot accept an answer")
        q = script.base_questions[state.current_base]
        new = replace(
            state, phase=Phase.LISTENING, pending_question=q.text, pending_is_followup=False
        )
        return new, AskBase(q.id, q.text)

    # Phase.LISTENING
    if not isinstance(event, (AnswerComplete, FollowupAnswered)):
        raise IllegalPhase("listening phase requires a completed answer event")
    q = script.base_questions[state.current_base]
    tokens = tuple(event.tokens)
    unmet = assess_checklist(tokens, q.checklist)
    keyword = extract_keyword(tokens, stoplist)
    entry = TranscriptEntry(
        question_id=q.id,
        question_text=state.pending_question or q.text,
        is_followup=state.pending_is_followup,
        answer_tokens=tuple(_surface(t) for t in tokens),
        unmet_item_ids=tuple(item.id for item in unmet),
    )
    transcript = state.transcript + (entry,)

    followup = gen_followup(state, script, unmet, keyword)
    if followup is not None:
        new = replace(
            state,
            followups_asked=state.followups_asked + 1,
            transcript=transcript,
            pending_question=followup,
            pending_is_followup=True,
        )
        return new, AskFollowup(followup)

    next_base = state.current_base + 1
    if next_base >= len(script.base_questions):
        new = replace(
            state, transcript=transcript, phase=Phase.DONE,
            pending_question=None, pending_is_followup=False,
        )
        return new, End()
    nq = script.base_questions[next_base]
    new = InterviewState(
        current_base=next_base,
        followups_asked=0,
        transcript=transcript,
        phase=Phase.LISTENING,
        pending_question=nq.text,
        pending_is_followup=False,
    )
    return new, AskBase(nq.id, nq.text)


def session_report(script: InterviewScript, state: InterviewState) -> dict:
    """JSON-ready summary: per base question, the unmet checklist items
    observed across its answers and the follow-up count used."""
    per_question = []
    for q in script.base_questions:
        entries = [e for e in state.transcript if e.question_id == q.id]
        unmet: list[str] = []
        for e in entries:
            for item_id in e.unmet_item_ids:
                if item_id not in unmet:
                    unmet.append(item_id)
        per_question.append(
            {
                "id": q.id,
                "text": q.text,
                "answers": len(entries),
                "followups_asked": max(0, len(entries) - 1) if entries else 0,
                "unmet_items": unmet,
            }
        )
    return {
        "questions": per_question,
        "finished": state.phase is Phase.DONE,
        "total_turns": len(state.transcript),
    }
