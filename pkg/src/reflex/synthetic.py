"""Synthetic corpus generation with planted, documented regularities.

The annotated corpora behind the original models are not available, so
training and acceptance run on generated sessions whose gold labels
follow explicit rules:

* backchannels: an IPU ending in an F0 fall followed by a long pause
  carries a gold backchannel 300-500 ms after VadOff; other IPUs end
  flat-or-rising and carry none.  Loud-tail contexts are labeled with
  assessment forms, quiet ones with continuers.
* TRPs: an IPU whose final token is a sentence-final particle is a
  gold TRP; the gold "taken" flag is a coin flip at TRPs.
* sentiment: a configurable fraction of utterances carry a word from
  the shipped lexicon.
* behaviors: Poisson events whose rates differ between "engaged" and
  "disengaged" sessions (used to train the engagement model).

Because the rules are explicit, learned models can be checked against
ground truth (held-out AUC) instead of against unavailable data.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .events import (
    DialogueEvent,
    behavior,
    gold_backchannel,
    gold_turn,
    prosody,
    vad_off,
    vad_on,
    word,
    write_corpus,
)

NOUNS = ["kyoto", "ryokou", "shigoto", "kazoku", "eiga", "gakkou", "tomodachi", "ongaku", "ryouri", "hon"]
VERBS = ["itta", "mita", "tabeta", "kiita", "yonda", "tsukutta"]
PARTICLES = ["ni", "wo", "wa", "ga", "de", "to"]
FINAL_PARTICLES = ["ne", "yo", "ka", "desu", "masu"]
FILLERS = ["ano", "eto", "sono"]
POSITIVE_WORDS = ["tanoshii", "ureshii", "subarashii", "oishii"]
NEGATIVE_WORDS = ["tsurai", "taihen", "kanashii", "samui"]
CONTINUER_FORMS = ["continuer_1", "continuer_2", "continuer_3"]
ASSESS_FORMS = ["assess_1", "assess_2", "assess_3"]

# Behavior events per second, tuned around the engagement baselines.
ENGAGED_RATES = {"laugh": 0.07, "nod": 0.17, "gaze_contact": 0.27, "user_backchannel": 0.2}
DISENGAGED_RATES = {"laugh": 0.01, "nod": 0.025, "gaze_contact": 0.05, "user_backchannel": 0.03}


@dataclass(frozen=True)
class SynthSpec:
    n_utterances: int = 20
    p_backchannel: float = 0.5
    p_loud_given_backchannel: float = 0.4
    p_trp: float = 0.5
    p_take_given_trp: float = 0.7
    p_filler_tail: float = 0.1
    sentiment_rate: float = 0.3
    engaged: bool = True
    frame_period_ms: int = 100

    def __post_init__(self):
        for name in ("p_backchannel", "p_loud_given_backchannel", "p_trp",
                     "p_take_given_trp", "p_filler_tail", "sentiment_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.n_utterances < 0:
            raise ValueError("n_utterances must be >= 0")


def session_events(spec: SynthSpec, rng: np.random.Generator) -> list[DialogueEvent]:
    """One session's time-ordered event list."""
    seq: list[tuple[int, int, DialogueEvent]] = []
    order = 0

    def emit(e: DialogueEvent):
        nonlocal order
        seq.append((e.t_ms, order, e))
        order += 1

    base_f0 = float(rng.uniform(110.0, 220.0))
    base_power = float(rng.uniform(-28.0, -22.0))
    t = 500

    for _ in range(spec.n_utterances):
        is_bc = rng.random() < spec.p_backchannel
        is_loud = is_bc and rng.random() < spec.p_loud_given_backchannel
        is_trp = rng.random() < spec.p_trp
        has_filler_tail = (not is_trp) and rng.random() < spec.p_filler_tail

        tokens: list[tuple[str, str]] = []
        n_core = int(rng.integers(2, 5))
        for k in range(n_core):
            if k % 2 == 0:
                tokens.append((str(rng.choice(NOUNS)), "NOUN"))
            else:
                tokens.append((str(rng.choice(PARTICLES)), "PRT"))
        if rng.random() < spec.sentiment_rate:
            pool = POSITIVE_WORDS if rng.random() < 0.5 else NEGATIVE_WORDS
            tokens.append((str(rng.choice(pool)), "ADJ"))
        tokens.append((str(rng.choice(VERBS)), "VERB"))
        if is_trp:
            tokens.append((str(rng.choice(FINAL_PARTICLES)), "PRT"))
        elif has_filler_tail:
            tokens.append((str(rng.choice(FILLERS)), "FILLER"))

        start = t
        emit(vad_on(start))
        cursor = start
        for surface, pos in tokens:
            dur = int(rng.integers(200, 351))
            emit(word(cursor, surface, pos, cursor + dur))
            cursor += dur
        end = cursor
        emit(vad_off(end))

        # Prosody through the utterance: the last 300 ms falls in
        # backchannel contexts and stays flat-or-rising otherwise.
        # Loud utterances (assessment contexts) run hot throughout.
        fall_start = end - 300
        tail_gain = float(rng.uniform(0.60, 0.75)) if is_bc else float(rng.uniform(1.0, 1.15))
        for ft in range(start, end + 1, spec.frame_period_ms):
            if ft >= fall_start:
                frac = (ft - fall_start) / 300.0
                f0 = base_f0 * (1.0 + (tail_gain - 1.0) * frac)
            else:
                f0 = base_f0 * float(rng.uniform(0.97, 1.03))
            power = base_power + float(rng.normal(0.0, 1.0))
            if is_loud:
                power += 10.0
            emit(prosody(ft, max(f0, 1.0), power))

        # Longer, fuller answers are likelier to be genuine turn ends.
        p_taken = spec.p_take_given_trp + (0.25 if len(tokens) >= 5 else -0.35)
        taken = bool(is_trp and rng.random() < min(1.0, max(0.0, p_taken)))
        emit(gold_turn(end, trp=is_trp, taken=taken))

        if is_bc:
            bc_t = end + int(rng.integers(300, 501))
            form = str(rng.choice(ASSESS_FORMS if is_loud else CONTINUER_FORMS))
            emit(gold_backchannel(bc_t, form))
            pause = int(rng.integers(700, 1201))
        else:
            pause = int(rng.integers(250, 701))

        # Unvoiced low-power frames keep features fresh through the pause.
        for ft in range(end + spec.frame_period_ms, end + pause, spec.frame_period_ms):
            emit(prosody(ft, 0.0, -55.0 + float(rng.normal(0.0, 1.5))))
        t = end + pause

    duration_s = t / 1000.0
    rates = ENGAGED_RATES if spec.engaged else DISENGAGED_RATES
    for kind, rate in rates.items():
        n = rng.poisson(rate * duration_s)
        for bt in sorted(int(x) for x in rng.uniform(0, t, size=n)):
            emit(behavior(bt, kind))

    seq.sort(key=lambda item: (item[0], item[1]))
    return [e for _, _, e in seq]


def generate_synthetic(
    spec: SynthSpec, seed: int, n_sessions: int, out_dir
) -> list[Path]:
    """Write n_sessions corpus files; byte-identical for a fixed seed."""
    out = Path(out_dir)
    paths: list[Path] = []
    if n_sessions <= 0:
        return paths
    out.mkdir(parents=True, exist_ok=True)
    for i in range(n_sessions):
        rng = np.random.default_rng([seed, i])
        events = session_events(spec, rng)
        path = out / f"session_{i:03d}.jsonl"
        write_corpus(path, events)
        paths.append(path)
    return paths


def generate_sessions(spec: SynthSpec, seed: int, n_sessions: int) -> list[list[DialogueEvent]]:
    """In-memory variant used by training and tests."""
    return [
        session_events(spec, np.random.default_rng([seed, i])) for i in range(n_sessions)
    ]
