"""Composite feature vectors for the IPU-level predictors.

The prosody module owns the frame-level block; this module adds the
linguistic tail block (final-token shape of the IPU) and the contexts
used by the take-turn model, and fixes the combined schemas.  Live text
sessions carry no prosody, so the prosodic block degrades to zeros
rather than blocking IPU-level predictions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .prosody import PROSODY_DIM, PROSODY_SCHEMA, FrameFeatures
from .timeline import Ipu
from .turntaking import DEFAULT_FILLERS

TRP_SCHEMA = "trp-v1"
TAKE_SCHEMA = "take-v1"
BCFORM_SCHEMA = "bcform-v1"

# Final tokens that typically close a Japanese clause.
FINAL_PARTICLES = frozenset({"ne", "yo", "ka", "wa", "desu", "masu", "da"})

_POS_BUCKETS = ("NOUN", "VERB", "ADJ", "PRT", "FILLER", "OTHER")
_POS_MAP = {
    "NOUN": "NOUN",
    "PROPN": "NOUN",
    "VERB": "VERB",
    "AUX": "VERB",
    "ADJ": "ADJ",
    "PRT": "PRT",
    "ADP": "PRT",
    "FILLER": "FILLER",
    "INTJ": "FILLER",
}

TAIL_DIM = len(_POS_BUCKETS) + 4
TRP_DIM = PROSODY_DIM + TAIL_DIM
BCFORM_DIM = PROSODY_DIM + TAIL_DIM
TAKE_DIM = 4


@dataclass(frozen=True)
class FeatureVec:
    vector: tuple[float, ...]
    schema_id: str


def tail_features(ipu: Ipu | None, fillers: frozenset[str] = DEFAULT_FILLERS) -> tuple[float, ...]:
    """Linguistic shape of the IPU tail; zeros for an empty/absent IPU."""
    pos_onehot = [0.0] * len(_POS_BUCKETS)
    is_final_particle = 0.0
    is_filler = 0.0
    token_count = 0.0
    duration_s = 0.0
    if ipu is not None:
        duration_s = min((ipu.end_ms - ipu.start_ms) / 1000.0, 10.0)
        if ipu.tokens:
            token_count = min(len(ipu.tokens), 20) / 10.0
            last = ipu.tokens[-1]
            bucket = _POS_MAP.get(last.pos.upper(), "OTHER")
            pos_onehot[_POS_BUCKETS.index(bucket)] = 1.0
            surface = last.surface.casefold()
            if surface in FINAL_PARTICLES:
                is_final_particle = 1.0
            if surface in fillers:
                is_filler = 1.0
    return (*pos_onehot, is_final_particle, is_filler, token_count, duration_s)


def _prosody_block(frame: FrameFeatures | None) -> tuple[float, ...]:
    if frame is None:
        return (0.0,) * PROSODY_DIM
    if frame.schema_id != PROSODY_SCHEMA:
        raise ValueError(f"unexpected prosody schema {frame.schema_id!r}")
    return frame.vector


def trp_features(
    ipu: Ipu | None,
    frame: FrameFeatures | None,
    fillers: frozenset[str] = DEFAULT_FILLERS,
) -> FeatureVec:
    return FeatureVec(_prosody_block(frame) + tail_features(ipu, fillers), TRP_SCHEMA)


def form_features(
    ipu: Ipu | None,
    frame: FrameFeatures | None,
    fillers: frozenset[str] = DEFAULT_FILLERS,
) -> FeatureVec:
    return FeatureVec(_prosody_block(frame) + tail_features(ipu, fillers), BCFORM_SCHEMA)


def take_context(
    ipu: Ipu | None,
    time_since_system_spoke_ms: int | None,
    system_initiative: bool,
) -> FeatureVec:
    """Context block, each component normalized to roughly [0, 1]."""
    duration = 0.0
    token_count = 0.0
    if ipu is not None:
        duration = min((ipu.end_ms - ipu.start_ms) / 1000.0, 10.0) / 10.0
        token_count = min(len(ipu.tokens), 20) / 20.0
    since_system = (
        1.0 if time_since_system_spoke_ms is None
        else min(time_since_system_spoke_ms / 1000.0, 30.0) / 30.0
    )
    return FeatureVec(
        (duration, token_count, since_system, 1.0 if system_initiative else 0.0),
        TAKE_SCHEMA,
    )
