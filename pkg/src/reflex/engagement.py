"""Rolling engagement estimation from detected listener behaviors.

Behavior events (laughs, nods, gaze contact, user backchannels) are
counted over a sliding window; a logistic model over the z-scored
counts yields a score in [0, 1] interpreted as how engaged the user
currently is.  The heavier hierarchical modeling of listener character
found in the literature is deliberately reduced to this trainable
count model.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from .errors import SchemaMismatch
from .events import BehaviorKind, EventKind
from .statmodel import LogisticModel, predict_prob

DEFAULT_WINDOW_MS = 30_000
ENGAGEMENT_SCHEMA = "engagement-v1"

# Feature order is part of the schema.
BEHAVIOR_ORDER = (
    BehaviorKind.LAUGH,
    BehaviorKind.NOD,
    BehaviorKind.GAZE_CONTACT,
    BehaviorKind.USER_BACKCHANNEL,
)

# Per-window (mean, std) count baselines used for z-scoring.
DEFAULT_BASELINES: dict[BehaviorKind, tuple[float, float]] = {
    BehaviorKind.LAUGH: (1.0, 1.0),
    BehaviorKind.NOD: (3.0, 2.0),
    BehaviorKind.GAZE_CONTACT: (5.0, 3.0),
    BehaviorKind.USER_BACKCHANNEL: (4.0, 2.0),
}


@dataclass(frozen=True)
class EngagementEstimate:
    score: float
    t_ms: int
    counts: dict[str, int]


@dataclass
class _Vec:
    vector: tuple
    schema_id: str = ENGAGEMENT_SCHEMA


class BehaviorWindow:
    """Counts of behavior events within the trailing window (t-w, t]."""

    def __init__(self, window_ms: int = DEFAULT_WINDOW_MS):
        if window_ms <= 0:
            raise ValueError("window_ms must be positive")
        self.window_ms = window_ms
        self.t_ms = 0
        self._events: deque[tuple[int, BehaviorKind]] = deque()

    def add(self, t_ms: int, kind: BehaviorKind) -> "BehaviorWindow":
        self._events.append((t_ms, kind))
        self.advance(t_ms)
        return self

    def advance(self, t_ms: int) -> None:
        if t_ms > self.t_ms:
            self.t_ms = t_ms
        cutoff = self.t_ms - self.window_ms
        while self._events and self._events[0][0] <= cutoff:
            self._events.popleft()

    def counts(self) -> dict[BehaviorKind, int]:
        out = {kind: 0 for kind in BEHAVIOR_ORDER}
        for _, kind in self._events:
            out[kind] += 1
        return out


def update_window(window: BehaviorWindow, event) -> BehaviorWindow:
    if event.kind is not EventKind.BEHAVIOR:
        raise ValueError(f"expected behavior event, got {event.kind}")
    return window.add(event.t_ms, event.payload)


def count_features(
    counts: Mapping[BehaviorKind, int],
    baselines: Mapping[BehaviorKind, tuple[float, float]] = DEFAULT_BASELINES,
) -> _Vec:
    vec = []
    for kind in BEHAVIOR_ORDER:
        mean, std = baselines[kind]
        vec.append((counts.get(kind, 0) - mean) / max(std, 1e-9))
    return _Vec(tuple(vec))


def estimate(
    model: LogisticModel,
    window: BehaviorWindow,
    baselines: Mapping[BehaviorKind, tuple[float, float]] = DEFAULT_BASELINES,
) -> EngagementEstimate:
    if model.schema_id != ENGAGEMENT_SCHEMA:
        raise SchemaMismatch(
            f"engagement model schema {model.schema_id!r} != {ENGAGEMENT_SCHEMA!r}"
        )
    counts = window.counts()
    score = predict_prob(model, count_features(counts, baselines))
    return EngagementEstimate(
        score=score,
        t_ms=window.t_ms,
        counts={kind.value: n for kind, n in counts.items()},
    )
