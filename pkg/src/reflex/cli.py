"""Command-line entry points.

Thin client over the service layer: every subcommand calls the same
functions the HTTP endpoints wrap, and ``serve`` hosts them.  All
errors exit nonzero without leaving partial output files.
"""

from __future__ import annotations

import sys

import click

from .errors import ReflexError
from .service.ops import run_eval, run_generate, run_replay, run_train
from .service.schemas import EvalRequest, GenerateRequest, ReplayRequest, TrainRequest


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Conversational decision engine: train, replay, evaluate, serve."""


def _train_options(fn):
    for opt in reversed([
        click.option("--lr", default=0.1, show_default=True),
        click.option("--epochs", default=200, show_default=True),
        click.option("--l2", default=1e-4, show_default=True),
        click.option("--seed", default=42, show_default=True),
        click.option("--batch-size", default=None, type=int),
        click.option("--out", required=True, type=click.Path(), help="Output model file."),
    ]):
        fn = opt(fn)
    return fn


def _run_training(kind: str, **kwargs) -> None:
    try:
        resp = run_train(TrainRequest(kind=kind, **kwargs))
    except (ReflexError, ValueError, OSError) as exc:
        _fail(exc)
        return
    for line in resp.report_lines:
        click.echo(line)
    for label, auc in resp.form_aucs.items():
        click.echo(f"form {label}: holdout_auc={auc:.4f}")
    click.echo(f"wrote {resp.out} (holdout_auc={resp.holdout_auc:.4f})")


@main.command("train-backchannel")
@click.argument("corpora", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--forms-dir", default=None, type=click.Path(),
              help="Also train one-vs-rest form models into this directory.")
@_train_options
def train_backchannel(corpora, forms_dir, out, lr, epochs, l2, seed, batch_size) -> None:
    """Train the frame-wise backchannel timing model."""
    _run_training("backchannel", corpora=list(corpora), out=out, forms_dir=forms_dir,
                  lr=lr, epochs=epochs, l2=l2, seed=seed, batch_size=batch_size)


@main.command("train-trp")
@click.argument("corpora", nargs=-1, required=True, type=click.Path(exists=True))
@_train_options
def train_trp_cmd(corpora, out, lr, epochs, l2, seed, batch_size) -> None:
    """Train the TRP detector on gold turn annotations."""
    _run_training("trp", corpora=list(corpora), out=out,
                  lr=lr, epochs=epochs, l2=l2, seed=seed, batch_size=batch_size)


@main.command("train-take")
@click.argument("corpora", nargs=-1, required=True, type=click.Path(exists=True))
@_train_options
def train_take_cmd(corpora, out, lr, epochs, l2, seed, batch_size) -> None:
    """Train the take-turn-given-TRP model."""
    _run_training("take", corpora=list(corpora), out=out,
                  lr=lr, epochs=epochs, l2=l2, seed=seed, batch_size=batch_size)


@main.command("train-engagement")
@click.option("--engaged", multiple=True, required=True, type=click.Path(exists=True),
              help="Corpus files/dirs from engaged sessions.")
@click.option("--disengaged", multiple=True, required=True, type=click.Path(exists=True),
              help="Corpus files/dirs from disengaged sessions.")
@_train_options
def train_engagement_cmd(engaged, disengaged, out, lr, epochs, l2, seed, batch_size) -> None:
    """Train the engagement estimator from labeled session groups."""
    _run_training("engagement", engaged=list(engaged), disengaged=list(disengaged),
                  out=out, lr=lr, epochs=epochs, l2=l2, seed=seed, batch_size=batch_size)


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--sessions", "n_sessions", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--utterances", default=20, show_default=True)
@click.option("--p-backchannel", default=0.5, show_default=True)
@click.option("--p-trp", default=0.5, show_default=True)
@click.option("--sentiment-rate", default=0.3, show_default=True)
@click.option("--engaged/--disengaged", default=True, show_default=True)
def generate(out_dir, n_sessions, seed, utterances, p_backchannel, p_trp,
             sentiment_rate, engaged) -> None:
    """Generate synthetic corpora with planted regularities."""
    try:
        resp = run_generate(GenerateRequest(
            out_dir=out_dir, n_sessions=n_sessions, seed=seed,
            n_utterances=utterances, p_backchannel=p_backchannel, p_trp=p_trp,
            sentiment_rate=sentiment_rate, engaged=engaged,
        ))
    except (ReflexError, ValueError, OSError) as exc:
        _fail(exc)
        return
    click.echo(f"wrote {len(resp.files)} session files to {out_dir}")


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--seed", default=42, show_default=True,
              help="Accepted for interface symmetry; replay is seed-independent.")
@click.option("--out", "log_out", default=None, type=click.Path(),
              help="Write the decision log here (JSONL).")
@click.option("--report", "report_out", default=None, type=click.Path(),
              help="Write the metrics report here (JSON).")
def replay(corpus, config, seed, log_out, report_out) -> None:
    """Replay a corpus deterministically and score it."""
    del seed  # scopes to training/generation only; logs are seed-free
    try:
        resp = run_replay(ReplayRequest(
            corpus=corpus, config=config, log_out=log_out, report_out=report_out,
        ))
    except (ReflexError, ValueError, OSError) as exc:
        _fail(exc)
        return
    bc = resp.report["backchannel"]
    turn = resp.report["turn"]
    click.echo(f"log records: {resp.n_log_records}")
    click.echo(f"backchannel: P={bc['precision']:.3f} R={bc['recall']:.3f} F1={bc['f1']:.3f}")
    click.echo(
        f"turn: acc={turn['accuracy']:.3f} cutin={turn['false_cutin_rate']:.3f} "
        f"latency={turn['mean_latency_ms']:.0f}ms"
    )
    click.echo(f"p99 frame cost: {resp.p99_frame_ms:.3f} ms")


@main.command("eval")
@click.argument("log", type=click.Path(exists=True))
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--report", "report_out", default=None, type=click.Path())
def eval_cmd(log, corpus, report_out) -> None:
    """Score an existing decision log against a corpus's gold labels."""
    try:
        resp = run_eval(EvalRequest(log=log, corpus=corpus, report_out=report_out))
    except (ReflexError, ValueError, OSError) as exc:
        _fail(exc)
        return
    import json as _json

    click.echo(_json.dumps(resp.report, indent=1, sort_keys=True))


@main.command()
@click.option("--port", default=8700, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--sessions-dir", default="sessions", show_default=True,
              help="Where session transcripts land (REFLEX_LOG_DIR overrides).")
@click.option("--ui", "ui_dir", default=None, type=click.Path(exists=True, file_okay=False),
              help="Serve this directory (the built frontend) at /.")
def serve(port, host, config, sessions_dir, ui_dir) -> None:
    """Run the live session gateway."""
    import uvicorn

    from .service.app import create_app
    from .service.ops import resolve_config

    try:
        app = create_app(resolve_config(config), sessions_base=sessions_dir, ui_dir=ui_dir)
    except (ReflexError, ValueError, OSError) as exc:
        _fail(exc)
        return
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
