import numpy as np
import pytest

from reflex.events import EventKind
from reflex.synthetic import SynthSpec, generate_sessions, generate_synthetic


class TestGeneration:
    def test_zero_sessions_writes_nothing(self, tmp_path):
        assert generate_synthetic(SynthSpec(), seed=1, n_sessions=0, out_dir=tmp_path) == []
        assert list(tmp_path.iterdir()) == []

    def test_fixed_seed_byte_identical(self, tmp_path):
        a = generate_synthetic(SynthSpec(), seed=9, n_sessions=3, out_dir=tmp_path / "a")
        b = generate_synthetic(SynthSpec(), seed=9, n_sessions=3, out_dir=tmp_path / "b")
        assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]

    def test_different_seed_differs(self, tmp_path):
        a = generate_synthetic(SynthSpec(), seed=9, n_sessions=1, out_dir=tmp_path / "a")
        b = generate_synthetic(SynthSpec(), seed=10, n_sessions=1, out_dir=tmp_path / "b")
        assert a[0].read_bytes() != b[0].read_bytes()

    def test_events_time_ordered(self):
        for session in generate_sessions(SynthSpec(), seed=2, n_sessions=3):
            times = [e.t_ms for e in session]
            assert times == sorted(times)

    def test_gold_backchannel_rate_within_two_percent(self):
        sessions = generate_sessions(SynthSpec(p_backchannel=0.5), seed=21, n_sessions=100)
        n_ipus = sum(
            sum(1 for e in s if e.kind is EventKind.GOLD_TURN) for s in sessions
        )
        n_bc = sum(
            sum(1 for e in s if e.kind is EventKind.GOLD_BACKCHANNEL) for s in sessions
        )
        assert n_bc / n_ipus == pytest.approx(0.5, abs=0.02)

    def test_backchannel_lands_in_pause_window(self):
        for session in generate_sessions(SynthSpec(p_backchannel=1.0), seed=3, n_sessions=2):
            vadoffs = [e.t_ms for e in session if e.kind is EventKind.VAD_OFF]
            for e in session:
                if e.kind is EventKind.GOLD_BACKCHANNEL:
                    prev_off = max(t for t in vadoffs if t <= e.t_ms)
                    assert 300 <= e.t_ms - prev_off <= 500

    def test_trp_rule_matches_final_particle(self):
        from reflex.features import FINAL_PARTICLES

        for session in generate_sessions(SynthSpec(), seed=4, n_sessions=3):
            last_word = None
            for e in session:
                if e.kind is EventKind.WORD:
                    last_word = e.payload.surface
                elif e.kind is EventKind.GOLD_TURN:
                    assert e.payload.trp == (last_word in FINAL_PARTICLES)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            SynthSpec(p_backchannel=1.5)
        with pytest.raises(ValueError):
            SynthSpec(n_utterances=-1)

    def test_engaged_sessions_have_more_behaviors(self):
        engaged = generate_sessions(SynthSpec(engaged=True), seed=5, n_sessions=5)
        disengaged = generate_sessions(SynthSpec(engaged=False), seed=5, n_sessions=5)

        def behavior_count(sessions):
            return sum(
                sum(1 for e in s if e.kind is EventKind.BEHAVIOR) for s in sessions
            )

        assert behavior_count(engaged) > 3 * behavior_count(disengaged)
