"""Deterministic corpus replay and metric computation.

A replay feeds a corpus through a fresh SessionEngine and returns the
decision log.  The log's serialized form is canonical (sorted keys,
repr floats, one JSON object per line) so byte-equality across runs and
platforms is meaningful.  Metrics compare the log against the corpus's
gold annotations: greedy time-nearest one-to-one matching for
backchannels, and turn accuracy / false cut-in / latency for
turn-taking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .config import ResourceBundle, SessionConfig, load_bundle
from .engine import SessionEngine, canonical_record
from .errors import CorpusParseError
from .events import DialogueEvent, EventKind, load_corpus

BC_TOLERANCE_MS = 500
CUTIN_WINDOW_MS = 1000


@dataclass(frozen=True)
class TimingStats:
    frames: int
    p50_ms: float
    p99_ms: float
    max_ms: float

    @classmethod
    def from_costs(cls, costs: list[float]) -> "TimingStats":
        if not costs:
            return cls(0, 0.0, 0.0, 0.0)
        ms = np.asarray(costs) * 1000.0
        return cls(
            frames=len(costs),
            p50_ms=float(np.percentile(ms, 50)),
            p99_ms=float(np.percentile(ms, 99)),
            max_ms=float(ms.max()),
        )


def replay_events(
    events: list[DialogueEvent],
    bundle: ResourceBundle,
    collect_timing: bool = False,
) -> tuple[list[dict], TimingStats]:
    engine = SessionEngine(bundle, collect_timing=collect_timing)
    engine.start()
    for e in events:
        engine.ingest(e)
    engine.finalize()
    return engine.log, TimingStats.from_costs(engine.frame_costs)


def replay(
    corpus_path,
    config: SessionConfig | None = None,
    bundle: ResourceBundle | None = None,
    collect_timing: bool = False,
) -> tuple[list[dict], TimingStats]:
    """Replay one corpus file deterministically.

    The random seed plays no role here: it scopes to training and
    synthetic generation only, so identical (corpus, config, models)
    yield byte-identical logs regardless of seed.
    """
    if bundle is None:
        bundle = load_bundle(config or SessionConfig())
    events = load_corpus(corpus_path)
    return replay_events(events, bundle, collect_timing)


def serialize_log(log: list[dict]) -> str:
    return "".join(canonical_record(r) + "\n" for r in log)


def write_log(path, log: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(serialize_log(log))


def load_log(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid log line: {exc}", line_no) from exc
    return out


# ----------------------------------------------------------------------
# Backchannel scoring

def backchannel_trigger_times(log: list[dict]) -> list[int]:
    return [r["t"] for r in log if r["module"] == "backchannel" and r.get("triggered")]


def greedy_match(
    triggers: list[int], golds: list[int], tolerance_ms: int
) -> list[tuple[int, int]]:
    """One-to-one greedy matching by increasing time distance.

    Ties break on gold time then trigger time, keeping the matching
    deterministic.
    """
    pairs = []
    for ti, tt in enumerate(triggers):
        for gi, gt in enumerate(golds):
            dist = abs(tt - gt)
            if dist <= tolerance_ms:
                pairs.append((dist, gt, tt, ti, gi))
    pairs.sort()
    used_t: set[int] = set()
    used_g: set[int] = set()
    matches = []
    for _, _, _, ti, gi in pairs:
        if ti in used_t or gi in used_g:
            continue
        used_t.add(ti)
        used_g.add(gi)
        matches.append((ti, gi))
    return matches


def eval_backchannel(
    log: list[dict], events: list[DialogueEvent], tolerance_ms: int = BC_TOLERANCE_MS
) -> dict:
    triggers = backchannel_trigger_times(log)
    golds = [e.t_ms for e in events if e.kind is EventKind.GOLD_BACKCHANNEL]
    matches = greedy_match(triggers, golds, tolerance_ms)
    n_match = len(matches)
    precision = n_match / len(triggers) if triggers else 0.0
    recall = n_match / len(golds) if golds else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "tolerance_ms": tolerance_ms,
        "n_triggers": len(triggers),
        "n_gold": len(golds),
    }


# ----------------------------------------------------------------------
# Turn scoring

def take_turn_times(log: list[dict]) -> list[int]:
    return [
        r["t"]
        for r in log
        if r["module"] == "turntaking"
        and r.get("kind") == "transition"
        and r.get("action") == "take_turn"
    ]


def eval_turn(
    log: list[dict], events: list[DialogueEvent], cutin_window_ms: int = CUTIN_WINDOW_MS
) -> dict:
    takes = take_turn_times(log)
    vadons = [e.t_ms for e in events if e.kind is EventKind.VAD_ON]
    golds = [(e.t_ms, e.payload.taken) for e in events if e.kind is EventKind.GOLD_TURN]
    gold_times = [t for t, _ in golds]

    def next_after(times, t):
        for x in times:
            if x > t:
                return x
        return None

    taken_points = [t for t, taken in golds if taken]
    not_taken_points = [t for t, taken in golds if not taken]

    hits = []
    for t in taken_points:
        horizon = next_after(vadons, t)
        for tt in takes:
            if tt >= t and (horizon is None or tt < horizon):
                hits.append((t, tt))
                break
    accuracy = len(hits) / len(taken_points) if taken_points else 0.0

    cutins = 0
    for t in not_taken_points:
        next_gold = next_after(gold_times, t)
        window_takes = [
            tt for tt in takes if tt >= t and (next_gold is None or tt < next_gold)
        ]
        for tt in window_takes:
            resumed = next_after(vadons, tt)
            if resumed is not None and resumed - tt <= cutin_window_ms:
                cutins += 1
                break
    false_cutin_rate = cutins / len(not_taken_points) if not_taken_points else 0.0

    latencies = [tt - t for t, tt in hits]
    mean_latency = sum(latencies) / len(latencies) if latencies else 0.0
    return {
        "accuracy": accuracy,
        "false_cutin_rate": false_cutin_rate,
        "mean_latency_ms": mean_latency,
        "n_gold_taken": len(taken_points),
        "n_gold_not_taken": len(not_taken_points),
        "n_take_turns": len(takes),
    }


# ----------------------------------------------------------------------
# Report

def response_counts(log: list[dict]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for r in log:
        if r["module"] == "listener" and r.get("kind") == "response":
            counts[r["response_kind"]] = counts.get(r["response_kind"], 0) + 1
    return dict(sorted(counts.items()))


def build_report(log: list[dict], events: list[DialogueEvent]) -> dict:
    duration = max((e.t_ms for e in events), default=0)
    questions = [r for r in log if r["module"] == "interview" and r.get("kind") == "question"]
    return {
        "backchannel": eval_backchannel(log, events),
        "turn": eval_turn(log, events),
        "responses": response_counts(log),
        "interview": {
            "questions": len(questions),
            "followups": sum(1 for q in questions if q["question_kind"] == "followup"),
        },
        "session": {
            "duration_ms": duration,
            "n_events": len(events),
            "n_log_records": len(log),
        },
    }


def write_report(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(report, fp, sort_keys=True, indent=1)
        fp.write("\n")
