import json

import numpy as np
import pytest

from reflex import events as ev
from reflex.config import SessionConfig, load_bundle
from reflex.harness import (
    build_report,
    eval_backchannel,
    eval_turn,
    greedy_match,
    load_log,
    replay,
    replay_events,
    serialize_log,
    write_log,
)
from reflex.errors import CorpusParseError
from reflex.events import load_corpus
from reflex.synthetic import SynthSpec, generate_sessions


class TestReplay:
    def test_empty_corpus_empty_log(self, tmp_path, listening_bundle):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        log, _ = replay(path, bundle=listening_bundle)
        assert log == []

    def test_same_corpus_identical_logs(self, fixture_corpus_path, listening_bundle):
        logs = [
            serialize_log(replay(fixture_corpus_path, bundle=listening_bundle)[0])
            for _ in range(3)
        ]
        assert logs[0] == logs[1] == logs[2]

    def test_forced_take_at_min_wait(self, listening_bundle):
        # p_take forced to 1.0 -> TakeTurn exactly at VadOff + 200 ms.
        import dataclasses

        import reflex.statmodel as sm
        from reflex.features import TAKE_DIM, TAKE_SCHEMA, TRP_DIM, TRP_SCHEMA

        sure_trp = sm.LogisticModel(weights=np.zeros(TRP_DIM), bias=40.0, schema_id=TRP_SCHEMA)
        sure_take = sm.LogisticModel(weights=np.zeros(TAKE_DIM), bias=40.0, schema_id=TAKE_SCHEMA)
        bundle = dataclasses.replace(listening_bundle, trp_model=sure_trp, take_model=sure_take)
        events = [ev.vad_on(0), ev.word(0, "ryokou", "NOUN", 900), ev.vad_off(1000)]
        events += [ev.prosody(t, 150.0, -25.0) for t in range(0, 1001, 100)]
        events.sort(key=lambda e: e.t_ms)
        log, _ = replay_events(events, bundle)
        takes = [r["t"] for r in log if r.get("action") == "take_turn"]
        assert takes == [1200]

    def test_parse_error_carries_line(self, tmp_path, listening_bundle):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"t":0,"type":"vad_on"}\n{"t":1,"type":"nope"}\n')
        with pytest.raises(CorpusParseError, match="line 2"):
            replay(path, bundle=listening_bundle)

    def test_log_file_round_trip(self, tmp_path, fixture_corpus_path, listening_bundle):
        log, _ = replay(fixture_corpus_path, bundle=listening_bundle)
        path = tmp_path / "log.jsonl"
        write_log(path, log)
        assert load_log(path) == log


class TestBackchannelScoring:
    def gold(self, *times):
        return [ev.gold_backchannel(t, "continuer_1") for t in times]

    def log_with_triggers(self, *times):
        return [
            {"t": t, "module": "backchannel", "kind": "frame", "p": 0.9, "triggered": True}
            for t in times
        ]

    def test_exact_triggers_perfect(self):
        m = eval_backchannel(self.log_with_triggers(1000, 5000), self.gold(1000, 5000))
        assert (m["precision"], m["recall"], m["f1"]) == (1.0, 1.0, 1.0)

    def test_no_triggers_reports_zero(self):
        m = eval_backchannel([], self.gold(1000))
        assert (m["precision"], m["recall"], m["f1"]) == (0.0, 0.0, 0.0)

    def test_one_to_one_matching(self):
        # Two triggers near one gold: only one can match.
        m = eval_backchannel(self.log_with_triggers(900, 1100), self.gold(1000))
        assert m["precision"] == 0.5
        assert m["recall"] == 1.0

    def test_tolerance_boundary(self):
        m = eval_backchannel(self.log_with_triggers(1500), self.gold(1000), tolerance_ms=500)
        assert m["recall"] == 1.0
        m = eval_backchannel(self.log_with_triggers(1501), self.gold(1000), tolerance_ms=500)
        assert m["recall"] == 0.0

    def test_greedy_prefers_nearest(self):
        matches = greedy_match([1000, 1400], [1050, 1390], tolerance_ms=500)
        assert sorted(matches) == [(0, 0), (1, 1)]

    def test_shuffled_triggers_degrade_f1(self):
        rng = np.random.default_rng(13)
        golds = self.gold(*range(1000, 60_000, 3000))
        aligned = self.log_with_triggers(*(g.t_ms + 100 for g in golds))
        f1_aligned = eval_backchannel(aligned, golds)["f1"]
        shuffled_times = sorted(int(x) for x in rng.uniform(0, 60_000, size=len(golds)))
        f1_shuffled = eval_backchannel(self.log_with_triggers(*shuffled_times), golds)["f1"]
        assert f1_aligned == 1.0
        assert f1_shuffled < f1_aligned


class TestTurnScoring:
    def take_log(self, *times):
        return [
            {"t": t, "module": "turntaking", "kind": "transition",
             "input": "deadline_expired", "state": "system_turn", "action": "take_turn"}
            for t in times
        ]

    def corpus(self):
        return [
            ev.vad_on(0), ev.vad_off(1000), ev.gold_turn(1000, True, True),
            ev.vad_on(4000), ev.vad_off(5000), ev.gold_turn(5000, True, False),
            ev.vad_on(5600), ev.vad_off(7000), ev.gold_turn(7000, True, True),
        ]

    def test_perfect_agreement(self):
        m = eval_turn(self.take_log(1500, 7600), self.corpus())
        assert m["accuracy"] == 1.0
        assert m["false_cutin_rate"] == 0.0
        assert m["mean_latency_ms"] == pytest.approx((500 + 600) / 2)

    def test_never_taking_gives_zero_accuracy(self):
        m = eval_turn([], self.corpus())
        assert m["accuracy"] == 0.0

    def test_false_cutin_counted(self):
        # Grab at 5200 on a not-taken point; user resumes at 5600.
        m = eval_turn(self.take_log(5200), self.corpus())
        assert m["false_cutin_rate"] == 1.0
        assert m["accuracy"] == 0.0

    def test_take_after_user_resumes_not_counted(self):
        # Taking at 4100 is after the user already resumed at 4000.
        m = eval_turn(self.take_log(4100), self.corpus())
        assert m["accuracy"] == 0.0


class TestReport:
    def test_report_structure(self, fixture_corpus_path, listening_bundle):
        log, _ = replay(fixture_corpus_path, bundle=listening_bundle)
        report = build_report(log, load_corpus(fixture_corpus_path))
        assert set(report) == {"backchannel", "turn", "responses", "interview", "session"}
        assert 0.0 <= report["backchannel"]["f1"] <= 1.0
        assert report["session"]["duration_ms"] > 0

    def test_fixture_matches_golden_report(self, fixture_corpus_path, listening_bundle):
        import pathlib

        log, _ = replay(fixture_corpus_path, bundle=listening_bundle)
        report = build_report(log, load_corpus(fixture_corpus_path))
        golden = json.loads(
            (pathlib.Path(fixture_corpus_path).parent / "expected_fixture_report.json").read_text()
        )
        assert report == golden

    def test_fixture_matches_golden_log(self, fixture_corpus_path, listening_bundle):
        import pathlib

        log, _ = replay(fixture_corpus_path, bundle=listening_bundle)
        golden = (pathlib.Path(fixture_corpus_path).parent / "expected_fixture_log.jsonl").read_text()
        assert serialize_log(log) == golden


class TestSyntheticReplayEndToEnd:
    def test_synthetic_sessions_replay_clean(self, listening_bundle):
        for session in generate_sessions(SynthSpec(n_utterances=8), seed=77, n_sessions=3):
            log, _ = replay_events(session, listening_bundle)
            report = build_report(log, session)
            assert report["turn"]["n_gold_taken"] + report["turn"]["n_gold_not_taken"] == 8
