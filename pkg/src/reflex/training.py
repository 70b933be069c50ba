"""Label construction and trainer entry points for the four predictors.

Labels come straight from corpus gold annotations:

* backchannel timing: a decision frame is positive iff a gold
  backchannel starts within (t, t + 500 ms];
* backchannel form: one-vs-rest over the features at each gold
  backchannel's time;
* TRP: the gold trp flag at each IPU end;
* take-turn: the gold taken flag restricted to gold TRPs;
* engagement: windows drawn from corpora labeled engaged/disengaged at
  the session level (the corpus format carries no per-window gold).

Held-out evaluation splits by session, never by row, so the reported
AUC cannot leak within-session structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backchannel import HORIZON_MS
from .engagement import BehaviorWindow, ENGAGEMENT_SCHEMA, count_features
from .events import DialogueEvent, EventKind
from .features import (
    BCFORM_SCHEMA,
    TAKE_SCHEMA,
    TRP_SCHEMA,
    form_features,
    take_context,
    trp_features,
)
from .prosody import PROSODY_SCHEMA, ProsodyTrack, features_at
from .statmodel import LabeledDataset, LogisticModel, TrainConfig, loss_and_grad, train
from .timeline import SessionTimeline

DEFAULT_FRAME_PERIOD_MS = 100
DEFAULT_ENGAGEMENT_PERIOD_MS = 1000


def auc_score(labels: np.ndarray, scores: np.ndarray) -> float:
    """Rank-based AUC (Mann-Whitney) with average ranks for ties."""
    labels = np.asarray(labels, dtype=float)
    scores = np.asarray(scores, dtype=float)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


# ----------------------------------------------------------------------
# Dataset builders (one session's event list in, feature rows out)


def _walk_frames(events: list[DialogueEvent], frame_period_ms: int):
    """Yield (t, timeline, track) at each decision frame, with every
    event at or before t already ingested (the engine's convention)."""
    timeline = SessionTimeline()
    track = ProsodyTrack(frame_period_ms)
    idx = 0
    if not events:
        return
    max_t = max(e.t_ms for e in events)
    for t in range(0, max_t + 1, frame_period_ms):
        while idx < len(events) and events[idx].t_ms <= t:
            e = events[idx]
            timeline.ingest(e)
            if e.kind is EventKind.PROSODY:
                track.add(e.t_ms, e.payload.f0_hz, e.payload.power_db)
            idx += 1
        timeline.advance(t)
        yield t, timeline, track


def bc_timing_rows(
    events: list[DialogueEvent],
    frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS,
    horizon_ms: int = HORIZON_MS,
) -> list[tuple[tuple[float, ...], int]]:
    gold = sorted(e.t_ms for e in events if e.kind is EventKind.GOLD_BACKCHANNEL)
    rows = []
    for t, timeline, track in _walk_frames(events, frame_period_ms):
        if not track.is_fresh(t):
            continue
        feats = features_at(track, timeline, t)
        label = int(any(t < g <= t + horizon_ms for g in gold))
        rows.append((feats.vector, label))
    return rows


def bc_form_rows(
    events: list[DialogueEvent], frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS
) -> list[tuple[tuple[float, ...], str]]:
    """(feature vector, gold form label) at each gold backchannel."""
    out = []
    golds = [(e.t_ms, e.payload.form) for e in events if e.kind is EventKind.GOLD_BACKCHANNEL]
    if not golds:
        return out
    next_gold = 0
    for t, timeline, track in _walk_frames(events, frame_period_ms):
        while next_gold < len(golds) and golds[next_gold][0] <= t:
            g_t, g_form = golds[next_gold]
            # Match the engine: the prosodic window anchors at the end
            # of the utterance the backchannel reacts to.
            ipu = timeline.current_ipu()
            anchor = ipu.end_ms if ipu is not None else g_t
            if track.is_fresh(anchor):
                frame = features_at(track, timeline, anchor)
                feats = form_features(ipu, frame)
                out.append((feats.vector, g_form))
            next_gold += 1
    return out


def trp_rows(
    events: list[DialogueEvent], frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS
) -> list[tuple[tuple[float, ...], int]]:
    timeline = SessionTimeline()
    track = ProsodyTrack(frame_period_ms)
    rows = []
    pending_vadoff: int | None = None
    for e in events:
        if e.kind is EventKind.PROSODY:
            timeline.ingest(e)
            track.add(e.t_ms, e.payload.f0_hz, e.payload.power_db)
            continue
        if e.kind is EventKind.VAD_OFF and timeline.vad_is_on:
            timeline.ingest(e)
            pending_vadoff = e.t_ms
            continue
        if e.kind is EventKind.GOLD_TURN and pending_vadoff is not None:
            frame = None
            if track.is_fresh(pending_vadoff):
                frame = features_at(track, timeline, pending_vadoff)
            feats = trp_features(timeline.current_ipu(), frame)
            rows.append((feats.vector, int(e.payload.trp)))
            pending_vadoff = None
        timeline.ingest(e)
    return rows


def take_rows(events: list[DialogueEvent]) -> list[tuple[tuple[float, ...], int]]:
    timeline = SessionTimeline()
    rows = []
    for e in events:
        if e.kind is EventKind.GOLD_TURN and e.payload.trp:
            ctx = take_context(timeline.current_ipu(), None, False)
            rows.append((ctx.vector, int(e.payload.taken)))
        timeline.ingest(e)
    return rows


def engagement_rows(
    events: list[DialogueEvent],
    label: int,
    period_ms: int = DEFAULT_ENGAGEMENT_PERIOD_MS,
) -> list[tuple[tuple[float, ...], int]]:
    window = BehaviorWindow()
    rows = []
    behaviors = [e for e in events if e.kind is EventKind.BEHAVIOR]
    if not events:
        return rows
    max_t = max(e.t_ms for e in events)
    idx = 0
    for t in range(period_ms, max_t + 1, period_ms):
        while idx < len(behaviors) and behaviors[idx].t_ms <= t:
            window.add(behaviors[idx].t_ms, behaviors[idx].payload)
            idx += 1
        window.advance(t)
        rows.append((count_features(window.counts()).vector, label))
    return rows


# ----------------------------------------------------------------------
# Trainers


@dataclass(frozen=True)
class TrainingReport:
    schema_id: str
    n_train: int
    n_test: int
    holdout_auc: float
    final_loss: float
    loss_curve: list[tuple[int, float]]

    def lines(self) -> list[str]:
        out = [f"schema={self.schema_id} train_rows={self.n_train} test_rows={self.n_test}"]
        for epoch, loss in self.loss_curve:
            out.append(f"epoch {epoch:5d}  loss {loss:.6f}")
        out.append(f"final_loss={self.final_loss:.6f} holdout_auc={self.holdout_auc:.4f}")
        return out


def split_sessions(n_sessions: int, seed: int) -> tuple[list[int], list[int]]:
    """Deterministic 80/20 session split with at least one test session."""
    rng = np.random.default_rng(seed)
    order = list(rng.permutation(n_sessions))
    n_test = max(1, n_sessions // 5) if n_sessions > 1 else 0
    return order[n_test:], order[:n_test]


def _fit_with_report(
    train_rows, test_rows, schema_id: str, cfg: TrainConfig
) -> tuple[LogisticModel, TrainingReport]:
    if not train_rows:
        raise ValueError("no training rows produced from the corpora")
    data = LabeledDataset.from_rows(train_rows, schema_id)
    curve: list[tuple[int, float]] = []
    stride = max(1, cfg.epochs // 10)

    def on_epoch(epoch, w, b):
        if epoch % stride == 0 or epoch == cfg.epochs - 1:
            loss, _, _ = loss_and_grad(w, b, data.x, data.y, cfg.l2)
            curve.append((epoch, float(loss)))

    model = train(data, cfg, on_epoch=on_epoch)
    if test_rows:
        test = LabeledDataset.from_rows(test_rows, schema_id)
        scores = 1.0 / (1.0 + np.exp(-(test.x @ model.weights + model.bias)))
        auc = auc_score(test.y, scores)
        n_test = len(test_rows)
    else:
        auc = 0.5
        n_test = 0
    report = TrainingReport(
        schema_id=schema_id,
        n_train=len(train_rows),
        n_test=n_test,
        holdout_auc=auc,
        final_loss=curve[-1][1] if curve else 0.0,
        loss_curve=curve,
    )
    return model, report


def _session_rows(sessions, row_fn):
    return [row_fn(events) for events in sessions]


def _gather(per_session_rows, indices):
    rows = []
    for i in indices:
        rows.extend(per_session_rows[i])
    return rows


def train_bc_timing(
    sessions: list[list[DialogueEvent]], cfg: TrainConfig = TrainConfig()
) -> tuple[LogisticModel, TrainingReport]:
    per = _session_rows(sessions, bc_timing_rows)
    tr, te = split_sessions(len(sessions), cfg.seed)
    return _fit_with_report(_gather(per, tr), _gather(per, te), PROSODY_SCHEMA, cfg)


def train_trp(
    sessions: list[list[DialogueEvent]], cfg: TrainConfig = TrainConfig()
) -> tuple[LogisticModel, TrainingReport]:
    per = _session_rows(sessions, trp_rows)
    tr, te = split_sessions(len(sessions), cfg.seed)
    return _fit_with_report(_gather(per, tr), _gather(per, te), TRP_SCHEMA, cfg)


def train_take(
    sessions: list[list[DialogueEvent]], cfg: TrainConfig = TrainConfig()
) -> tuple[LogisticModel, TrainingReport]:
    per = _session_rows(sessions, take_rows)
    tr, te = split_sessions(len(sessions), cfg.seed)
    return _fit_with_report(_gather(per, tr), _gather(per, te), TAKE_SCHEMA, cfg)


def train_bc_forms(
    sessions: list[list[DialogueEvent]],
    labels: list[str],
    cfg: TrainConfig = TrainConfig(),
) -> tuple[dict[str, LogisticModel], dict[str, TrainingReport]]:
    """One-vs-rest: one binary model per inventory label."""
    per = _session_rows(sessions, bc_form_rows)
    tr, te = split_sessions(len(sessions), cfg.seed)
    train_pairs = _gather(per, tr)
    test_pairs = _gather(per, te)
    models: dict[str, LogisticModel] = {}
    reports: dict[str, TrainingReport] = {}
    for label in labels:
        train_rows = [(vec, int(form == label)) for vec, form in train_pairs]
        test_rows = [(vec, int(form == label)) for vec, form in test_pairs]
        models[label], reports[label] = _fit_with_report(
            train_rows, test_rows, BCFORM_SCHEMA, cfg
        )
    return models, reports


def train_engagement(
    engaged_sessions: list[list[DialogueEvent]],
    disengaged_sessions: list[list[DialogueEvent]],
    cfg: TrainConfig = TrainConfig(),
) -> tuple[LogisticModel, TrainingReport]:
    per_pos = [engagement_rows(s, 1) for s in engaged_sessions]
    per_neg = [engagement_rows(s, 0) for s in disengaged_sessions]
    tr_p, te_p = split_sessions(len(per_pos), cfg.seed)
    tr_n, te_n = split_sessions(len(per_neg), cfg.seed + 1)
    train_rows = _gather(per_pos, tr_p) + _gather(per_neg, tr_n)
    test_rows = _gather(per_pos, te_p) + _gather(per_neg, te_n)
    return _fit_with_report(train_rows, test_rows, ENGAGEMENT_SCHEMA, cfg)
