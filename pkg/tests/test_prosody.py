import math

import numpy as np
import pytest

from reflex import events as ev
from reflex.errors import EmptyTrack, NonMonotoneTimestamp
from reflex.prosody import (
    PROSODY_FEATURE_NAMES,
    ProsodyTrack,
    features_at,
    update_track,
)
from reflex.timeline import SessionTimeline

F0_SLOPE_500 = PROSODY_FEATURE_NAMES.index("f0_slope_500")
F0_SLOPE_200 = PROSODY_FEATURE_NAMES.index("f0_slope_200")
F0_MEAN_500 = PROSODY_FEATURE_NAMES.index("f0_mean_500")
POW_MEAN_200 = PROSODY_FEATURE_NAMES.index("power_mean_200")
POW_MEAN_500 = PROSODY_FEATURE_NAMES.index("power_mean_500")
VOICED_RATIO = PROSODY_FEATURE_NAMES.index("voiced_ratio_500")


def track_from(frames):
    track = ProsodyTrack()
    for t, f0, power in frames:
        track.add(t, f0, power)
    return track


class TestTrackStats:
    def test_single_sample_mean(self):
        track = track_from([(0, 120.0, -20.0)])
        assert track.logf0_stats.mean == pytest.approx(math.log(120.0))

    def test_two_sample_mean(self):
        track = track_from([(0, 100.0, -20.0), (100, 200.0, -20.0)])
        expected = (math.log(100.0) + math.log(200.0)) / 2
        assert track.logf0_stats.mean == pytest.approx(expected)

    def test_unvoiced_updates_power_only(self):
        track = track_from([(0, 100.0, -20.0)])
        n_f0 = track.logf0_stats.n
        update_track(track, ev.prosody(100, 0.0, -30.0))
        assert track.logf0_stats.n == n_f0
        assert track.power_stats.n == 2

    def test_non_monotone_rejected(self):
        track = track_from([(0, 100.0, -20.0)])
        with pytest.raises(NonMonotoneTimestamp):
            track.add(0, 110.0, -20.0)


class TestFeatures:
    def test_empty_track_raises(self):
        with pytest.raises(EmptyTrack):
            features_at(ProsodyTrack(), SessionTimeline(), 0)

    def test_constant_f0_zero_slopes(self):
        track = track_from([(t, 120.0, -20.0) for t in range(0, 1001, 100)])
        feats = features_at(track, SessionTimeline(), 1000)
        assert feats.vector[F0_SLOPE_200] == 0.0
        assert feats.vector[F0_SLOPE_500] == 0.0

    def test_rising_f0_slope_matches_polyfit_oracle(self):
        # f0 rises 100 -> 200 Hz over the trailing 500 ms; the slope
        # feature must equal an independent least-squares fit over the
        # identical z-scored samples.
        frames = [(t, 100.0 + 0.2 * t, -20.0) for t in range(0, 501, 100)]
        track = track_from(frames)
        feats = features_at(track, SessionTimeline(), 500)
        window = [(t, f0) for t, f0, _ in frames if t > 0]  # (t-500, t]
        mean = track.logf0_stats.mean
        std = track.logf0_stats.std
        xs = np.array([t / 1000.0 for t, _ in window])
        ys = np.array([(math.log(f0) - mean) / std for _, f0 in window])
        oracle_slope = np.polyfit(xs, ys, 1)[0]
        assert feats.vector[F0_SLOPE_500] > 0
        assert feats.vector[F0_SLOPE_500] == pytest.approx(oracle_slope, rel=1e-9)

    def test_all_unvoiced_window(self):
        track = track_from([(t, 0.0, -50.0) for t in range(0, 501, 100)])
        feats = features_at(track, SessionTimeline(), 500)
        assert feats.vector[VOICED_RATIO] == 0.0
        assert feats.vector[F0_MEAN_500] == 0.0
        assert feats.vector[F0_SLOPE_500] == 0.0

    def test_power_shift_invariance_post_normalization(self):
        rng = np.random.default_rng(7)
        times = range(0, 120_000, 100)  # 1200 frames
        powers = rng.normal(-25.0, 4.0, size=1200)
        f0s = rng.uniform(90.0, 250.0, size=1200)
        base = ProsodyTrack()
        shifted = ProsodyTrack()
        for i, t in enumerate(times):
            base.add(t, float(f0s[i]), float(powers[i]))
            shifted.add(t, float(f0s[i]), float(powers[i]) + 12.5)
        tl = SessionTimeline()
        fb = features_at(base, tl, 119_900)
        fs = features_at(shifted, tl, 119_900)
        assert fs.vector[POW_MEAN_200] == pytest.approx(fb.vector[POW_MEAN_200], rel=1e-6, abs=1e-9)
        assert fs.vector[POW_MEAN_500] == pytest.approx(fb.vector[POW_MEAN_500], rel=1e-6, abs=1e-9)

    def test_slope_signs_track_monotone_f0(self):
        rising = track_from([(t, 100.0 + t, -20.0) for t in range(0, 501, 100)])
        falling = track_from([(t, 600.0 - t, -20.0) for t in range(0, 501, 100)])
        tl = SessionTimeline()
        assert features_at(rising, tl, 500).vector[F0_SLOPE_500] > 0
        assert features_at(falling, tl, 500).vector[F0_SLOPE_500] < 0

    def test_determinism(self):
        frames = [(t, 100.0 + (t % 300) / 7.0, -22.0 + (t % 500) / 90.0) for t in range(0, 2001, 100)]
        f1 = features_at(track_from(frames), SessionTimeline(), 2000)
        f2 = features_at(track_from(frames), SessionTimeline(), 2000)
        assert f1.vector == f2.vector

    def test_time_features_follow_timeline(self):
        tl = SessionTimeline()
        tl.ingest(ev.vad_on(0))
        tl.ingest(ev.vad_off(1000))
        track = track_from([(t, 120.0, -20.0) for t in range(0, 1601, 100)])
        feats = features_at(track, tl, 1600)
        names = dict(zip(PROSODY_FEATURE_NAMES, feats.vector))
        assert names["silence_s"] == pytest.approx(0.6)
        assert names["time_in_ipu_s"] == 0.0
