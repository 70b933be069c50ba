"""Session configuration and resource loading.

A session config is a single JSON document; every field has a default
that resolves to the data files and starter models shipped inside the
package, so an empty config is a runnable listening session.  All
referenced files are loaded eagerly at session start and thresholds are
range-checked, making configuration errors fail fast rather than
mid-dialogue.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .backchannel import BackchannelPolicy, load_inventory
from .engagement import DEFAULT_BASELINES, ENGAGEMENT_SCHEMA
from .errors import ConfigError
from .events import BehaviorKind
from .interview import InterviewScript, load_script
from .statmodel import LogisticModel, load as load_model
from .turntaking import TurnConfig

DATA_DIR = Path(__file__).parent / "data"
MODELS_DIR = DATA_DIR / "models"


class Task(str, Enum):
    LISTENING = "listening"
    INTERVIEW = "interview"


@dataclass(frozen=True)
class SessionConfig:
    task: Task = Task.LISTENING
    # Model files
    timing_model: Path = MODELS_DIR / "bc_timing.json"
    form_models: dict[str, Path] = field(default_factory=dict)  # label -> path
    trp_model: Path = MODELS_DIR / "trp.json"
    take_model: Path = MODELS_DIR / "take.json"
    engagement_model: Path = MODELS_DIR / "engagement.json"
    # Thresholds
    theta_bc: float = 0.5
    tau_s: float = 0.3
    min_wait_ms: int = 200
    max_wait_ms: int = 2000
    refractory_ms: int = 1500
    ipu_gap_ms: int = 200
    # Cadences
    frame_period_ms: int = 100
    engagement_period_ms: int = 1000
    engagement_window_ms: int = 30_000
    # Low-engagement hook: prefer elaborating questions after the score
    # stays below the threshold for the dwell time.
    low_engagement_threshold: float = 0.3
    low_engagement_dwell_ms: int = 10_000
    # Synthetic speech pacing for system utterance durations
    utterance_min_ms: int = 500
    utterance_ms_per_char: int = 60
    # Resource files
    templates_path: Path = DATA_DIR / "templates.json"
    lexicon_path: Path = DATA_DIR / "sentiment_lexicon.tsv"
    fillers_path: Path = DATA_DIR / "fillers.txt"
    stop_nouns_path: Path = DATA_DIR / "stop_nouns.txt"
    forms_path: Path = DATA_DIR / "backchannel_forms.json"
    script_path: Path = DATA_DIR / "interview_script.json"
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.theta_bc < 1.0:
            raise ConfigError("theta_bc must be in (0, 1)")
        if not 0.0 <= self.tau_s <= 1.0:
            raise ConfigError("tau_s must be in [0, 1]")
        if not (0 < self.min_wait_ms <= self.max_wait_ms):
            raise ConfigError("need 0 < min_wait_ms <= max_wait_ms")
        if self.refractory_ms <= 0 or self.ipu_gap_ms <= 0:
            raise ConfigError("refractory_ms and ipu_gap_ms must be positive")
        if self.frame_period_ms <= 0 or self.engagement_period_ms <= 0:
            raise ConfigError("cadence periods must be positive")

    def turn_config(self) -> TurnConfig:
        return TurnConfig(
            min_wait_ms=self.min_wait_ms,
            max_wait_ms=self.max_wait_ms,
            hold_turn_on_overlap=(self.task is Task.INTERVIEW),
        )


_PATH_FIELDS = {
    "timing_model", "trp_model", "take_model", "engagement_model",
    "templates_path", "lexicon_path", "fillers_path", "stop_nouns_path",
    "forms_path", "script_path",
}


def config_from_obj(obj: dict) -> SessionConfig:
    kwargs: dict = {}
    for key, value in obj.items():
        if key == "task":
            kwargs["task"] = Task(value)
        elif key == "form_models":
            kwargs["form_models"] = {str(k): Path(v) for k, v in value.items()}
        elif key in _PATH_FIELDS:
            kwargs[key] = Path(value)
        else:
            kwargs[key] = value
    try:
        return SessionConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"unknown config field: {exc}") from exc


def load_config(path) -> SessionConfig:
    try:
        with open(path, encoding="utf-8") as fp:
            obj = json.load(fp)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_obj(obj)


def load_templates(path) -> dict[str, list[str]]:
    try:
        with open(path, encoding="utf-8") as fp:
            obj = json.load(fp)
        return {str(k): [str(t) for t in v] for k, v in obj.items()}
    except (OSError, json.JSONDecodeError, AttributeError, TypeError) as exc:
        raise ConfigError(f"cannot load templates {path}: {exc}") from exc


def load_lexicon(path) -> dict[str, float]:
    lexicon: dict[str, float] = {}
    try:
        with open(path, encoding="utf-8") as fp:
            for line_no, line in enumerate(fp, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ConfigError(f"{path}:{line_no}: expected 'surface<TAB>score'")
                score = float(parts[1])
                if not -1.0 <= score <= 1.0:
                    raise ConfigError(f"{path}:{line_no}: score {score} outside [-1, 1]")
                lexicon[parts[0].casefold()] = score
    except OSError as exc:
        raise ConfigError(f"cannot load lexicon {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"cannot parse lexicon {path}: {exc}") from exc
    return lexicon


def load_wordlist(path) -> frozenset[str]:
    try:
        with open(path, encoding="utf-8") as fp:
            return frozenset(
                line.strip().casefold() for line in fp if line.strip() and not line.startswith("#")
            )
    except OSError as exc:
        raise ConfigError(f"cannot load word list {path}: {exc}") from exc


@dataclass(frozen=True)
class ResourceBundle:
    """Everything a session engine needs, loaded and validated."""

    config: SessionConfig
    bc_policy: BackchannelPolicy
    trp_model: LogisticModel
    take_model: LogisticModel
    engagement_model: LogisticModel
    templates: dict[str, list[str]]
    lexicon: dict[str, float]
    fillers: frozenset[str]
    stop_nouns: frozenset[str]
    script: InterviewScript
    baselines: dict[BehaviorKind, tuple[float, float]]


def load_bundle(config: SessionConfig) -> ResourceBundle:
    inventory = load_inventory(config.forms_path)
    form_paths = dict(config.form_models)
    if not form_paths:
        form_paths = {f.label: MODELS_DIR / f"bc_form_{f.label}.json" for f in inventory}
    missing = [p for p in form_paths.values() if not Path(p).exists()]
    for p in (config.timing_model, config.trp_model, config.take_model,
              config.engagement_model):
        if not Path(p).exists():
            missing.append(p)
    if missing:
        raise ConfigError(f"missing model files: {', '.join(str(m) for m in missing)}")

    engagement_model = load_model(config.engagement_model)
    if engagement_model.schema_id != ENGAGEMENT_SCHEMA:
        raise ConfigError(
            f"engagement model has schema {engagement_model.schema_id!r}, "
            f"expected {ENGAGEMENT_SCHEMA!r}"
        )
    policy = BackchannelPolicy(
        timing_model=load_model(config.timing_model),
        form_models={label: load_model(path) for label, path in form_paths.items()},
        theta_bc=config.theta_bc,
        refractory_ms=config.refractory_ms,
        inventory=inventory,
    )
    return ResourceBundle(
        config=config,
        bc_policy=policy,
        trp_model=load_model(config.trp_model),
        take_model=load_model(config.take_model),
        engagement_model=engagement_model,
        templates=load_templates(config.templates_path),
        lexicon=load_lexicon(config.lexicon_path),
        fillers=load_wordlist(config.fillers_path),
        stop_nouns=load_wordlist(config.stop_nouns_path),
        script=load_script(config.script_path),
        baselines=dict(DEFAULT_BASELINES),
    )
