"""Two-step end-of-turn prediction and the finite-state turn machine.

Turn-taking is decomposed: first estimate the probability that an IPU
end is a transition-relevance place (TRP), then, given a TRP, the
probability that the system should actually take the turn.  The product
feeds a linear wait-time policy (confident -> short wait, unsure ->
long wait), and a six-state turn machine converts VAD edges, deadline
expiries, and system utterance boundaries into concrete actions.

The machine is a pure transition function over an explicit table so it
can be enumerated exhaustively in tests.  Undefined (state, input)
pairs raise IllegalTransition.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

from .errors import IllegalTransition, IpuOpen
from .statmodel import LogisticModel, predict_prob
from .timeline import Ipu, TimedWord

DEFAULT_FILLERS = frozenset({"ano", "eto", "e-", "ma-", "sono"})


class FsttmState(str, Enum):
    USER_TURN = "user_turn"
    SYSTEM_TURN = "system_turn"
    FREE_AFTER_USER = "free_after_user"
    FREE_AFTER_SYSTEM = "free_after_system"
    OVERLAP_USER_HOLDS = "overlap_user_holds"
    OVERLAP_SYSTEM_HOLDS = "overlap_system_holds"


class TurnInput(str, Enum):
    USER_VAD_ON = "user_vad_on"
    USER_VAD_OFF = "user_vad_off"
    DEADLINE_EXPIRED = "deadline_expired"
    SYSTEM_UTTERANCE_START = "system_utterance_start"
    SYSTEM_UTTERANCE_END = "system_utterance_end"
    FILLER_DETECTED = "filler_detected"


class TurnAction(str, Enum):
    NONE = "none"
    TAKE_TURN = "take_turn"
    RELEASE_TURN = "release_turn"
    CONTINUE_WAIT = "continue_wait"
    BACK_OFF = "back_off"


@dataclass(frozen=True)
class TurnConfig:
    min_wait_ms: int = 200
    max_wait_ms: int = 2000
    hold_turn_on_overlap: bool = False

    def __post_init__(self):
        if not (0 < self.min_wait_ms <= self.max_wait_ms):
            raise ValueError("need 0 < min_wait_ms <= max_wait_ms")


@dataclass(frozen=True)
class TrpDecision:
    p_trp: float
    p_take_given_trp: float
    p_take: float

    def __post_init__(self):
        for name in ("p_trp", "p_take_given_trp", "p_take"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if abs(self.p_take - self.p_trp * self.p_take_given_trp) > 1e-12:
            raise ValueError("p_take must equal p_trp * p_take_given_trp")


@dataclass(frozen=True)
class TurnState:
    fsttm: FsttmState = FsttmState.FREE_AFTER_SYSTEM
    wait_deadline_ms: int | None = None
    last_decision: TrpDecision | None = None


def detect_trp(model: LogisticModel, ipu: Ipu, features, vad_off_seen: bool = False) -> float:
    """Probability that this IPU end is a transition-relevance place.

    Evaluated once per IPU close; calling it while the user is still
    speaking is a contract violation.
    """
    if not (ipu.closed or vad_off_seen):
        raise IpuOpen("TRP detection requires a closed IPU or an observed VadOff")
    return predict_prob(model, features)


def decide_take_turn(model: LogisticModel, trp_prob: float, context) -> TrpDecision:
    """Populate the two-step decision; p_take is the exact product."""
    if not 0.0 <= trp_prob <= 1.0:
        raise ValueError(f"trp_prob={trp_prob} outside [0, 1]")
    p_take_given_trp = predict_prob(model, context)
    return TrpDecision(
        p_trp=trp_prob,
        p_take_given_trp=p_take_given_trp,
        p_take=trp_prob * p_take_given_trp,
    )


def wait_time(cfg: TurnConfig, p_take: float) -> float:
    """Silence the system will wait before taking the turn, in ms.

    Linear in (1 - p_take): full confidence waits min_wait_ms, zero
    confidence waits max_wait_ms.
    """
    if not 0.0 <= p_take <= 1.0:
        raise ValueError(f"p_take={p_take} outside [0, 1]")
    return cfg.min_wait_ms + (1.0 - p_take) * (cfg.max_wait_ms - cfg.min_wait_ms)


def detect_filler(tokens: Iterable[TimedWord], lexicon: frozenset[str] = DEFAULT_FILLERS) -> bool:
    """True iff the final token surface is a known filler/hesitation."""
    last = None
    for tok in tokens:
        last = tok
    if last is None:
        return False
    return last.surface.casefold() in lexicon


# Deadline effects attached to transitions.
_SET, _EXTEND, _CLEAR, _KEEP = "set", "extend", "clear", "keep"

# (state, input) -> (next_state, action, deadline_effect).  The
# SYSTEM_TURN + USER_VAD_ON row depends on hold_turn_on_overlap and is
# resolved in transition_table().
_BASE_TABLE = {
    (FsttmState.USER_TURN, TurnInput.USER_VAD_OFF): (
        FsttmState.FREE_AFTER_USER, TurnAction.NONE, _SET),
    (FsttmState.FREE_AFTER_USER, TurnInput.USER_VAD_ON): (
        FsttmState.USER_TURN, TurnAction.NONE, _CLEAR),
    (FsttmState.FREE_AFTER_USER, TurnInput.DEADLINE_EXPIRED): (
        FsttmState.SYSTEM_TURN, TurnAction.TAKE_TURN, _CLEAR),
    (FsttmState.FREE_AFTER_USER, TurnInput.FILLER_DETECTED): (
        FsttmState.FREE_AFTER_USER, TurnAction.CONTINUE_WAIT, _EXTEND),
    (FsttmState.SYSTEM_TURN, TurnInput.SYSTEM_UTTERANCE_START): (
        FsttmState.SYSTEM_TURN, TurnAction.NONE, _KEEP),
    (FsttmState.SYSTEM_TURN, TurnInput.SYSTEM_UTTERANCE_END): (
        FsttmState.FREE_AFTER_SYSTEM, TurnAction.RELEASE_TURN, _KEEP),
    (FsttmState.FREE_AFTER_SYSTEM, TurnInput.USER_VAD_ON): (
        FsttmState.USER_TURN, TurnAction.NONE, _KEEP),
    (FsttmState.FREE_AFTER_SYSTEM, TurnInput.SYSTEM_UTTERANCE_START): (
        FsttmState.SYSTEM_TURN, TurnAction.NONE, _KEEP),
    (FsttmState.OVERLAP_USER_HOLDS, TurnInput.USER_VAD_OFF): (
        FsttmState.SYSTEM_TURN, TurnAction.NONE, _KEEP),
    (FsttmState.OVERLAP_USER_HOLDS, TurnInput.SYSTEM_UTTERANCE_END): (
        FsttmState.USER_TURN, TurnAction.NONE, _KEEP),
    (FsttmState.OVERLAP_SYSTEM_HOLDS, TurnInput.USER_VAD_OFF): (
        FsttmState.SYSTEM_TURN, TurnAction.NONE, _KEEP),
    (FsttmState.OVERLAP_SYSTEM_HOLDS, TurnInput.SYSTEM_UTTERANCE_END): (
        FsttmState.USER_TURN, TurnAction.NONE, _KEEP),
}


def transition_table(cfg: TurnConfig) -> dict:
    """Full (state, input) -> (next_state, action, effect) map for cfg."""
    table = dict(_BASE_TABLE)
    if cfg.hold_turn_on_overlap:
        table[(FsttmState.SYSTEM_TURN, TurnInput.USER_VAD_ON)] = (
            FsttmState.OVERLAP_SYSTEM_HOLDS, TurnAction.NONE, _KEEP)
    else:
        table[(FsttmState.SYSTEM_TURN, TurnInput.USER_VAD_ON)] = (
            FsttmState.OVERLAP_USER_HOLDS, TurnAction.BACK_OFF, _KEEP)
    return table


def fsttm_step(
    state: TurnState,
    inp: TurnInput,
    now_ms: int,
    decision: TrpDecision | None = None,
    cfg: TurnConfig = TurnConfig(),
) -> tuple[TurnState, TurnAction]:
    """One deterministic machine step; pure.

    On UserVadOff the wait deadline is set from the supplied decision's
    p_take (a missing decision is treated as p_take = 0, the cautious
    maximum wait).  FillerDetected while waiting pushes the deadline out
    to the maximum.
    """
    row = transition_table(cfg).get((state.fsttm, inp))
    if row is None:
        raise IllegalTransition(f"{inp.value} undefined in state {state.fsttm.value}")
    next_fsttm, action, effect = row
    if effect == _SET:
        p_take = decision.p_take if decision is not None else 0.0
        deadline = now_ms + int(round(wait_time(cfg, p_take)))
        new = TurnState(next_fsttm, deadline, decision)
    elif effect == _EXTEND:
        new = TurnState(next_fsttm, now_ms + cfg.max_wait_ms, state.last_decision)
    elif effect == _CLEAR:
        new = TurnState(next_fsttm, None, state.last_decision)
    else:
        new = replace(state, fsttm=next_fsttm)
    if new.fsttm is not FsttmState.FREE_AFTER_USER and new.wait_deadline_ms is not None:
        new = replace(new, wait_deadline_ms=None)
    return new, action
