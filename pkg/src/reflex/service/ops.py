"""Service-layer operations shared by the CLI and the HTTP endpoints.

The CLI is a thin client over these functions; the FastAPI handlers
wrap the same functions behind pydantic models.  All outputs are
written only after the computation has fully succeeded, so a failing
run never leaves partial files behind.
"""

from __future__ import annotations

from pathlib import Path

from ..config import SessionConfig, load_bundle, load_config
from ..errors import ConfigError
from ..events import load_corpus
from ..harness import build_report, load_log, replay_events, write_log, write_report
from ..statmodel import TrainConfig, save as save_model
from ..synthetic import SynthSpec, generate_synthetic
from ..training import (
    train_bc_forms,
    train_bc_timing,
    train_engagement,
    train_take,
    train_trp,
)
from .schemas import (
    EvalRequest,
    EvalResponse,
    GenerateRequest,
    GenerateResponse,
    ReplayRequest,
    ReplayResponse,
    TrainRequest,
    TrainResponse,
)


def expand_corpora(paths: list[str]) -> list[Path]:
    """Each entry is a corpus file or a directory of *.jsonl files."""
    out: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            out.extend(sorted(p.glob("*.jsonl")))
        elif p.exists():
            out.append(p)
        else:
            raise ConfigError(f"corpus path does not exist: {p}")
    if not out:
        raise ConfigError("no corpus files found")
    return out


def resolve_config(path: str | None) -> SessionConfig:
    return load_config(path) if path else SessionConfig()


def run_replay(req: ReplayRequest) -> ReplayResponse:
    config = resolve_config(req.config)
    bundle = load_bundle(config)
    events = load_corpus(req.corpus)
    log, timing = replay_events(events, bundle, collect_timing=True)
    report = build_report(log, events)
    if req.log_out:
        write_log(req.log_out, log)
    if req.report_out:
        write_report(req.report_out, report)
    return ReplayResponse(
        report=report, n_log_records=len(log), p99_frame_ms=timing.p99_ms
    )


def run_eval(req: EvalRequest) -> EvalResponse:
    log = load_log(req.log)
    events = load_corpus(req.corpus)
    report = build_report(log, events)
    if req.report_out:
        write_report(req.report_out, report)
    return EvalResponse(report=report)


def run_generate(req: GenerateRequest) -> GenerateResponse:
    spec = SynthSpec(
        n_utterances=req.n_utterances,
        p_backchannel=req.p_backchannel,
        p_trp=req.p_trp,
        sentiment_rate=req.sentiment_rate,
        engaged=req.engaged,
    )
    files = generate_synthetic(spec, req.seed, req.n_sessions, req.out_dir)
    return GenerateResponse(files=[str(f) for f in files])


def run_train(req: TrainRequest) -> TrainResponse:
    cfg = TrainConfig(
        lr=req.lr, epochs=req.epochs, l2=req.l2, seed=req.seed, batch_size=req.batch_size
    )
    form_aucs: dict[str, float] = {}
    if req.kind == "engagement":
        engaged = [load_corpus(p) for p in expand_corpora(req.engaged)]
        disengaged = [load_corpus(p) for p in expand_corpora(req.disengaged)]
        model, report = train_engagement(engaged, disengaged, cfg)
    else:
        sessions = [load_corpus(p) for p in expand_corpora(req.corpora)]
        if req.kind == "backchannel":
            model, report = train_bc_timing(sessions, cfg)
            if req.forms_dir:
                from ..backchannel import DEFAULT_INVENTORY

                labels = [f.label for f in DEFAULT_INVENTORY]
                forms, form_reports = train_bc_forms(sessions, labels, cfg)
                forms_dir = Path(req.forms_dir)
                forms_dir.mkdir(parents=True, exist_ok=True)
                for label, m in forms.items():
                    save_model(m, forms_dir / f"bc_form_{label}.json")
                form_aucs = {k: r.holdout_auc for k, r in form_reports.items()}
        elif req.kind == "trp":
            model, report = train_trp(sessions, cfg)
        else:
            model, report = train_take(sessions, cfg)
    out = Path(req.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    return TrainResponse(
        out=str(out),
        holdout_auc=report.holdout_auc,
        n_train=report.n_train,
        n_test=report.n_test,
        report_lines=report.lines(),
        form_aucs=form_aucs,
    )
