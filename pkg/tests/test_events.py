import io

import pytest

from reflex import events as ev
from reflex.errors import CorpusParseError


def round_trip(event):
    obj = ev.event_to_obj(event)
    return ev.event_from_obj(obj)


class TestRoundTrip:
    @pytest.mark.parametrize(
        "event",
        [
            ev.vad_on(0),
            ev.vad_off(1500),
            ev.word(100, "ryokou", "NOUN", 400),
            ev.prosody(200, 123.4, -21.5),
            ev.prosody(300, 0.0, -55.0),
            ev.behavior(400, "laugh"),
            ev.gold_backchannel(500, "continuer_1"),
            ev.gold_turn(600, trp=True, taken=False),
        ],
    )
    def test_event_round_trip(self, event):
        assert round_trip(event) == event


class TestParsing:
    def test_unknown_type_is_error(self):
        fp = io.StringIO('{"t": 0, "type": "telepathy"}\n')
        with pytest.raises(CorpusParseError, match="unknown event type"):
            list(ev.read_corpus(fp))

    def test_unknown_keys_ignored(self):
        fp = io.StringIO('{"t": 5, "type": "vad_on", "annotator": "x", "extra": 1}\n')
        events = list(ev.read_corpus(fp))
        assert events == [ev.vad_on(5)]

    def test_line_number_in_error(self):
        fp = io.StringIO('{"t": 0, "type": "vad_on"}\nnot json\n')
        with pytest.raises(CorpusParseError, match="line 2"):
            list(ev.read_corpus(fp))

    def test_missing_payload_key(self):
        fp = io.StringIO('{"t": 0, "type": "word", "surface": "a"}\n')
        with pytest.raises(CorpusParseError):
            list(ev.read_corpus(fp))

    def test_blank_lines_skipped(self):
        fp = io.StringIO('\n{"t": 0, "type": "vad_on"}\n\n')
        assert len(list(ev.read_corpus(fp))) == 1

    def test_file_round_trip(self, tmp_path):
        events = [ev.vad_on(0), ev.word(0, "a", "NOUN", 100), ev.vad_off(100)]
        path = tmp_path / "c.jsonl"
        ev.write_corpus(path, events)
        assert ev.load_corpus(path) == events
