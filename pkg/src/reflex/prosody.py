"""Prosodic feature extraction at the decision-frame cadence.

Raw prosody frames (F0 in Hz with 0 meaning unvoiced, power in dB)
accumulate in a per-session track that also keeps online per-speaker
moments of voiced log-F0 and power.  ``features_at`` turns the trailing
200 ms / 500 ms windows into a fixed-length z-scored vector: F0 stats
are computed over voiced frames only and fall back to 0 when a window
contains no voiced frame.

Times inside the vector are expressed in seconds so all features live
on comparable scales for the logistic models downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyTrack, NonMonotoneTimestamp
from .events import EventKind
from .timeline import SessionTimeline

DEFAULT_FRAME_PERIOD_MS = 100

PROSODY_SCHEMA = "prosody-v1"
PROSODY_FEATURE_NAMES = (
    "f0_mean_200",
    "f0_slope_200",
    "f0_mean_500",
    "f0_slope_500",
    "power_mean_200",
    "power_slope_200",
    "power_mean_500",
    "power_slope_500",
    "voiced_ratio_500",
    "time_in_ipu_s",
    "silence_s",
)
PROSODY_DIM = len(PROSODY_FEATURE_NAMES)

_EPS = 1e-9


class _Welford:
    """Online mean/variance (population variance, exact for one sample)."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self._m2 = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self._m2 += delta * (x - self.mean)

    @property
    def std(self) -> float:
        if self.n == 0:
            return 0.0
        return math.sqrt(self._m2 / self.n)

    def z(self, x: float) -> float:
        s = self.std
        if s < _EPS:
            return 0.0
        return (x - self.mean) / s


@dataclass(frozen=True)
class FrameFeatures:
    t_ms: int
    vector: tuple[float, ...]
    schema_id: str


class ProsodyTrack:
    """Ordered prosody frames plus running speaker statistics."""

    def __init__(self, frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS):
        self.frame_period_ms = frame_period_ms
        self.frames: list[tuple[int, float, float]] = []  # (t_ms, f0_hz, power_db)
        self.logf0_stats = _Welford()
        self.power_stats = _Welford()

    def add(self, t_ms: int, f0_hz: float, power_db: float) -> "ProsodyTrack":
        if self.frames and t_ms <= self.frames[-1][0]:
            raise NonMonotoneTimestamp(
                f"prosody frame at {t_ms} not after {self.frames[-1][0]}"
            )
        if f0_hz < 0:
            raise ValueError("f0_hz must be >= 0")
        self.frames.append((t_ms, f0_hz, power_db))
        if f0_hz > 0:
            self.logf0_stats.add(math.log(f0_hz))
        self.power_stats.add(power_db)
        return self

    def is_fresh(self, t_ms: int) -> bool:
        return bool(self.frames) and t_ms <= self.frames[-1][0] + self.frame_period_ms

    def _window(self, t_ms: int, width_ms: int) -> list[tuple[int, float, float]]:
        lo = t_ms - width_ms
        out = []
        for frame in reversed(self.frames):
            if frame[0] > t_ms:
                continue
            if frame[0] <= lo:
                break
            out.append(frame)
        out.reverse()
        return out


def update_track(track: ProsodyTrack, event) -> ProsodyTrack:
    if event.kind is not EventKind.PROSODY:
        raise ValueError(f"expected prosody event, got {event.kind}")
    return track.add(event.t_ms, event.payload.f0_hz, event.payload.power_db)


def _ls_slope(points: list[tuple[float, float]]) -> float:
    """Least-squares slope of y over x; 0 when underdetermined."""
    n = len(points)
    if n < 2:
        return 0.0
    mx = sum(p[0] for p in points) / n
    my = sum(p[1] for p in points) / n
    sxx = sum((p[0] - mx) ** 2 for p in points)
    if sxx < _EPS:
        return 0.0
    sxy = sum((p[0] - mx) * (p[1] - my) for p in points)
    return sxy / sxx


def _f0_stats(track: ProsodyTrack, window) -> tuple[float, float]:
    voiced = [(t / 1000.0, track.logf0_stats.z(math.log(f0))) for t, f0, _ in window if f0 > 0]
    if not voiced:
        return 0.0, 0.0
    mean = sum(z for _, z in voiced) / len(voiced)
    return mean, _ls_slope(voiced)


def _power_stats(track: ProsodyTrack, window) -> tuple[float, float]:
    pts = [(t / 1000.0, track.power_stats.z(p)) for t, _, p in window]
    mean = sum(z for _, z in pts) / len(pts)
    return mean, _ls_slope(pts)


def features_at(track: ProsodyTrack, timeline: SessionTimeline, t_ms: int) -> FrameFeatures:
    """Feature vector for decision frame ``t_ms``.

    Requires at least one prosody frame within the trailing 500 ms;
    callers gate on ``track.is_fresh`` to skip stale frames.
    """
    if not track.frames:
        raise EmptyTrack("no prosody frames")
    w200 = track._window(t_ms, 200)
    w500 = track._window(t_ms, 500)
    if not w500:
        raise EmptyTrack(f"no prosody frames within 500 ms of t={t_ms}")

    f0_mean_200, f0_slope_200 = _f0_stats(track, w200) if w200 else (0.0, 0.0)
    f0_mean_500, f0_slope_500 = _f0_stats(track, w500)
    pow_mean_200, pow_slope_200 = _power_stats(track, w200) if w200 else (0.0, 0.0)
    pow_mean_500, pow_slope_500 = _power_stats(track, w500)
    voiced_ratio = sum(1 for _, f0, _ in w500 if f0 > 0) / len(w500)

    # Both clock features cap so that very long spans cannot dominate
    # a linear model; the informative range is the first couple seconds.
    time_in_ipu_s = 0.0
    if timeline.vad_is_on:
        ipu = timeline.current_ipu()
        if ipu is not None:
            time_in_ipu_s = min(max(0, t_ms - ipu.start_ms) / 1000.0, 10.0)
    silence_s = min(timeline.current_silence_ms(t_ms) / 1000.0, 2.0)

    vector = (
        f0_mean_200,
        f0_slope_200,
        f0_mean_500,
        f0_slope_500,
        pow_mean_200,
        pow_slope_200,
        pow_mean_500,
        pow_slope_500,
        voiced_ratio,
        time_in_ipu_s,
        silence_s,
    )
    if not all(math.isfinite(v) for v in vector):
        raise AssertionError(f"non-finite feature vector at t={t_ms}: {vector}")
    return FrameFeatures(t_ms=t_ms, vector=vector, schema_id=PROSODY_SCHEMA)
