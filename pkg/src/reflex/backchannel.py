"""Frame-wise backchannel timing decision and form selection.

A logistic timing model is evaluated once per decision frame and
answers: should a backchannel begin within the next 500 ms?  The
prediction itself is pure; emission is gated by a probability
threshold, a refractory period that prevents machine-gun backchannels
on consecutive frames, and a no-overlap rule while the system speaks.
Form selection runs one-vs-rest over a fixed inventory loaded from
configuration, with ties broken by inventory order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError, NoModelsLoaded
from .statmodel import LogisticModel, predict_prob

HORIZON_MS = 500  # prediction horizon for "backchannel starts soon"

DEFAULT_THETA_BC = 0.5
DEFAULT_REFRACTORY_MS = 1500


@dataclass(frozen=True)
class BackchannelForm:
    label: str
    text: str
    family: str  # "continuer" or "assessment"


DEFAULT_INVENTORY: tuple[BackchannelForm, ...] = (
    BackchannelForm("continuer_1", "un", "continuer"),
    BackchannelForm("continuer_2", "un un", "continuer"),
    BackchannelForm("continuer_3", "un un un", "continuer"),
    BackchannelForm("assess_1", "he-", "assessment"),
    BackchannelForm("assess_2", "sou", "assessment"),
    BackchannelForm("assess_3", "naruhodo", "assessment"),
)


def load_inventory(path) -> tuple[BackchannelForm, ...]:
    try:
        with open(path, encoding="utf-8") as fp:
            items = json.load(fp)
        inventory = tuple(
            BackchannelForm(str(i["label"]), str(i["text"]), str(i.get("family", "continuer")))
            for i in items
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot load form inventory {path}: {exc}") from exc
    labels = [f.label for f in inventory]
    texts = [f.text for f in inventory]
    if len(set(labels)) != len(labels) or len(set(texts)) != len(texts):
        raise ConfigError("form inventory labels and texts must be unique")
    return inventory


@dataclass(frozen=True)
class BackchannelPolicy:
    timing_model: LogisticModel
    form_models: dict[str, LogisticModel] = field(default_factory=dict)
    theta_bc: float = DEFAULT_THETA_BC
    refractory_ms: int = DEFAULT_REFRACTORY_MS
    inventory: tuple[BackchannelForm, ...] = DEFAULT_INVENTORY
    horizon_ms: int = HORIZON_MS

    def __post_init__(self):
        if not 0.0 < self.theta_bc < 1.0:
            raise ValueError("theta_bc must be in (0, 1)")
        if self.refractory_ms <= 0:
            raise ValueError("refractory_ms must be positive")


@dataclass(frozen=True)
class BcGateState:
    now_ms: int
    last_bc_t_ms: int | None = None
    system_speaking: bool = False


def predict_timing(policy: BackchannelPolicy, features) -> float:
    """Probability that a backchannel should start within the horizon.

    Pure: gating (overlap, refractory) is decide()'s job, so this can
    be evaluated on every frame including during system speech.
    """
    return predict_prob(policy.timing_model, features)


def decide(policy: BackchannelPolicy, prob: float, state: BcGateState) -> bool:
    """True iff a backchannel should be emitted now."""
    if prob < policy.theta_bc:
        return False
    if state.system_speaking:
        return False
    if state.last_bc_t_ms is not None and state.now_ms - state.last_bc_t_ms < policy.refractory_ms:
        return False
    return True


def select_form(policy: BackchannelPolicy, features) -> BackchannelForm:
    """Argmax over one-vs-rest form scores; inventory order breaks ties."""
    if not policy.form_models:
        raise NoModelsLoaded("no backchannel form models loaded")
    best: BackchannelForm | None = None
    best_score = float("-inf")
    for form in policy.inventory:
        model = policy.form_models.get(form.label)
        if model is None:
            continue
        score = predict_prob(model, features)
        if score > best_score:
            best, best_score = form, score
    if best is None:
        raise NoModelsLoaded("form models do not match the inventory labels")
    return best
