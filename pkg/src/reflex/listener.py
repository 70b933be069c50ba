"""Listener response generation for the attentive-listening task.

Five turn-level response types are generated from the focus word and
the sentiment polarity of the user's utterance: partial repeats and
elaborating questions build on the focus word, assessments and generic
sentimental responses on polarity, and a generic continuation prompt is
the guaranteed fallback.  Arbitration is priority-ordered with an
anti-repetition rule: a kind used in the immediately preceding response
falls through to the next candidate (Generic is never skipped).

Templates live in an external JSON file keyed by kind with an "{X}"
placeholder so the inventory is localizable without code changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import MissingFocus

# Case particles that mark the preceding noun as topic/object.
_CASE_PARTICLES = frozenset({"wa", "ga", "wo", "o"})
_NOUN_TAGS = frozenset({"NOUN", "PROPN"})


class ResponseKind(str, Enum):
    PARTIAL_REPEAT = "partial_repeat"
    ELABORATING_QUESTION = "elaborating_question"
    ASSESSMENT = "assessment"
    GENERIC_SENTIMENTAL = "generic_sentimental"
    GENERIC = "generic"
    BACKCHANNEL_ONLY = "backchannel_only"


# Arbitration priority, highest first; Generic is the fallback floor.
PRIORITY = (
    ResponseKind.ELABORATING_QUESTION,
    ResponseKind.PARTIAL_REPEAT,
    ResponseKind.ASSESSMENT,
    ResponseKind.GENERIC_SENTIMENTAL,
    ResponseKind.GENERIC,
)

DEFAULT_TEMPLATES: dict[str, list[str]] = {
    "partial_repeat": ["{X}?"],
    "elaborating_question": ["donna {X} desu ka?", "{X} wa dou deshita ka?"],
    "assessment_positive": ["ii desu ne"],
    "assessment_negative": ["taihen desu ne"],
    "generic_sentimental": ["sou nan desu ne"],
    "generic": ["sorekara dou narimashita ka?"],
}


@dataclass(frozen=True)
class FocusWord:
    surface: str
    pos: str
    confidence: float
    source_ipu: int = -1

    def __post_init__(self):
        if not self.surface:
            raise ValueError("focus surface must be nonempty")
        if not self.confidence > 0:
            raise ValueError("focus confidence must be positive")


@dataclass(frozen=True)
class ResponsePlan:
    kind: ResponseKind
    text: str
    trigger_t_ms: int = 0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind is not ResponseKind.BACKCHANNEL_ONLY and not self.text:
            raise ValueError(f"{self.kind.value} plan requires nonempty text")


def _surface_pos(tok) -> tuple[str, str]:
    if hasattr(tok, "surface"):
        return tok.surface, tok.pos
    return tok[0], tok[1]


def extract_focus(
    tokens: Sequence, stoplist: frozenset[str] = frozenset(), source_ipu: int = -1
) -> FocusWord | None:
    """Rightmost content noun not in the stoplist.

    Confidence is 1.0 when a topic/object case particle immediately
    follows the noun, else 0.6; None when the utterance has no content
    noun at all.
    """
    pairs = [_surface_pos(t) for t in tokens]
    for i in range(len(pairs) - 1, -1, -1):
        surface, pos = pairs[i]
        if pos.upper() in _NOUN_TAGS and surface.casefold() not in stoplist:
            marked = i + 1 < len(pairs) and pairs[i + 1][0].casefold() in _CASE_PARTICLES
            return FocusWord(surface, pos, 1.0 if marked else 0.6, source_ipu)
    return None


def _template(templates: Mapping[str, list[str]], key: str, index: int = 0) -> str:
    options = templates.get(key) or DEFAULT_TEMPLATES[key]
    return options[index % len(options)]


def gen_partial_repeat(
    focus: FocusWord | None,
    templates: Mapping[str, list[str]] = DEFAULT_TEMPLATES,
    t_ms: int = 0,
) -> ResponsePlan:
    if focus is None:
        raise MissingFocus("partial repeat requires a focus word")
    text = _template(templates, "partial_repeat").replace("{X}", focus.surface)
    return ResponsePlan(
        ResponseKind.PARTIAL_REPEAT, text, t_ms,
        {"focus": focus.surface, "template": "partial_repeat/0"},
    )


def gen_elaborating_question(
    focus: FocusWord | None,
    templates: Mapping[str, list[str]] = DEFAULT_TEMPLATES,
    rotation: int = 0,
    t_ms: int = 0,
) -> ResponsePlan:
    """Template chosen round-robin by ``rotation`` (calls rotate it)."""
    if focus is None:
        raise MissingFocus("elaborating question requires a focus word")
    options = templates.get("elaborating_question") or DEFAULT_TEMPLATES["elaborating_question"]
    index = rotation % len(options)
    text = options[index].replace("{X}", focus.surface)
    return ResponsePlan(
        ResponseKind.ELABORATING_QUESTION, text, t_ms,
        {"focus": focus.surface, "template": f"elaborating_question/{index}"},
    )


def classify_sentiment(tokens: Iterable, lexicon: Mapping[str, float]) -> float:
    """Mean polarity of scored tokens, clamped to [-1, 1]; 0 if none hit."""
    total = 0.0
    hits = 0
    for tok in tokens:
        surface, _ = _surface_pos(tok)
        score = lexicon.get(surface.casefold())
        if score is not None:
            total += score
            hits += 1
    polarity = total / max(1, hits)
    return max(-1.0, min(1.0, polarity))


def gen_assessment(
    polarity: float,
    tau_s: float = 0.3,
    templates: Mapping[str, list[str]] = DEFAULT_TEMPLATES,
    t_ms: int = 0,
) -> ResponsePlan | None:
    """Assessment for strong polarity, generic sentimental for weak."""
    if polarity == 0.0:
        return None
    if abs(polarity) >= tau_s:
        key = "assessment_positive" if polarity > 0 else "assessment_negative"
        return ResponsePlan(
            ResponseKind.ASSESSMENT, _template(templates, key), t_ms,
            {"polarity": polarity, "template": f"{key}/0"},
        )
    return ResponsePlan(
        ResponseKind.GENERIC_SENTIMENTAL, _template(templates, "generic_sentimental"),
        t_ms, {"polarity": polarity, "template": "generic_sentimental/0"},
    )


def generic_response(
    templates: Mapping[str, list[str]] = DEFAULT_TEMPLATES, t_ms: int = 0
) -> ResponsePlan:
    return ResponsePlan(
        ResponseKind.GENERIC, _template(templates, "generic"), t_ms,
        {"template": "generic/0"},
    )


def arbitrate(
    candidates: Sequence[ResponsePlan], prev_kind: ResponseKind | None
) -> ResponsePlan:
    """Pick the highest-priority candidate, skipping a repeat of the
    previous response kind; Generic is never skipped and always present.
    """
    by_kind = {}
    for plan in candidates:
        by_kind.setdefault(plan.kind, plan)
    generic = by_kind.get(ResponseKind.GENERIC)
    if generic is None:
        raise ValueError("arbitrate requires a Generic fallback candidate")
    for kind in PRIORITY:
        plan = by_kind.get(kind)
        if plan is None:
            continue
        if kind is not ResponseKind.GENERIC and kind == prev_kind:
            continue
        return plan
    return generic


class ResponsePlanner:
    """Per-session response state: rotation, anti-repetition, last focus.

    When ``prefer_elaborating`` is set (the low-engagement hook) and the
    current utterance has no focus word, the most recent focus from
    earlier in the session is reused so the system can re-engage the
    user with a question about the last topic.
    """

    def __init__(
        self,
        templates: Mapping[str, list[str]] | None = None,
        lexicon: Mapping[str, float] | None = None,
        stoplist: frozenset[str] = frozenset(),
        tau_s: float = 0.3,
    ):
        self.templates = dict(templates) if templates else dict(DEFAULT_TEMPLATES)
        self.lexicon = dict(lexicon) if lexicon else {}
        self.stoplist = stoplist
        self.tau_s = tau_s
        self.prev_kind: ResponseKind | None = None
        self.last_focus: FocusWord | None = None
        self._rotation = 0

    def respond(
        self, tokens: Sequence, t_ms: int, source_ipu: int = -1,
        prefer_elaborating: bool = False,
    ) -> ResponsePlan:
        focus = extract_focus(tokens, self.stoplist, source_ipu)
        if focus is not None:
            self.last_focus = focus
        elif prefer_elaborating:
            focus = self.last_focus
        polarity = classify_sentiment(tokens, self.lexicon)

        candidates = [generic_response(self.templates, t_ms)]
        if focus is not None:
            candidates.append(
                gen_elaborating_question(focus, self.templates, self._rotation, t_ms)
            )
            candidates.append(gen_partial_repeat(focus, self.templates, t_ms))
        assessment = gen_assessment(polarity, self.tau_s, self.templates, t_ms)
        if assessment is not None:
            candidates.append(assessment)

        plan = arbitrate(candidates, self.prev_kind)
        if plan.kind is ResponseKind.ELABORATING_QUESTION:
            self._rotation += 1
        self.prev_kind = plan.kind
        return plan
