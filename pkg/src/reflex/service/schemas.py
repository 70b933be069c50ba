"""Pydantic models for the gateway wire protocol and REST endpoints.

Live sessions speak newline-framed JSON: every message is exactly one
line of UTF-8 JSON, one message per websocket text frame.  Client
messages carry an "op" discriminator, server events an "ev" key.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field, ValidationError  # noqa: F401  (re-exported)


# ----------------------------------------------------------------------
# Client -> server

class StartMsg(BaseModel):
    op: Literal["start"]
    task: Literal["listening", "interview"] = "listening"


class VadMsg(BaseModel):
    op: Literal["vad"]
    on: bool
    t: int = Field(ge=0)


class WordMsg(BaseModel):
    op: Literal["word"]
    surface: str = Field(min_length=1)
    pos: str = "NOUN"
    t: int = Field(ge=0)
    t_end: int = Field(ge=0)


class BehaviorMsg(BaseModel):
    op: Literal["behavior"]
    kind: Literal["laugh", "nod", "gaze_contact", "user_backchannel"]
    t: int = Field(ge=0)


class EndMsg(BaseModel):
    op: Literal["end"]


ClientMsg = Annotated[
    Union[StartMsg, VadMsg, WordMsg, BehaviorMsg, EndMsg],
    Field(discriminator="op"),
]


class ClientEnvelope(BaseModel):
    msg: ClientMsg


# ----------------------------------------------------------------------
# Server -> client (documented shapes; the engine emits plain dicts)

class BackchannelEvent(BaseModel):
    ev: Literal["backchannel"]
    form: str
    text: str
    t: int


class ResponseEvent(BaseModel):
    ev: Literal["response"]
    kind: str
    text: str
    t: int


class TurnStateEvent(BaseModel):
    ev: Literal["turn_state"]
    state: str
    t: int


class QuestionEvent(BaseModel):
    ev: Literal["question"]
    text: str
    t: int


class EngagementEvent(BaseModel):
    ev: Literal["engagement"]
    score: float
    t: int


class ErrorEvent(BaseModel):
    ev: Literal["error"]
    code: str
    msg: str


# ----------------------------------------------------------------------
# REST

class HealthResponse(BaseModel):
    status: str
    open_sessions: int


class ReplayRequest(BaseModel):
    corpus: str
    config: str | None = None
    log_out: str | None = None
    report_out: str | None = None


class ReplayResponse(BaseModel):
    report: dict
    n_log_records: int
    p99_frame_ms: float


class EvalRequest(BaseModel):
    log: str
    corpus: str
    report_out: str | None = None


class EvalResponse(BaseModel):
    report: dict


class GenerateRequest(BaseModel):
    out_dir: str
    n_sessions: int = Field(ge=0)
    seed: int = 0
    n_utterances: int = 20
    p_backchannel: float = 0.5
    p_trp: float = 0.5
    sentiment_rate: float = 0.3
    engaged: bool = True


class GenerateResponse(BaseModel):
    files: list[str]


class TrainRequest(BaseModel):
    kind: Literal["backchannel", "trp", "take", "engagement"]
    corpora: list[str] = []
    engaged: list[str] = []      # engagement only
    disengaged: list[str] = []   # engagement only
    out: str
    forms_dir: str | None = None  # backchannel only
    lr: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    seed: int = 42
    batch_size: int | None = None


class TrainResponse(BaseModel):
    out: str
    holdout_auc: float
    n_train: int
    n_test: int
    report_lines: list[str]
    form_aucs: dict[str, float] = {}
