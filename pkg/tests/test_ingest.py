import json

import pytest

from affinity_miner import (
    ALL_TYPES,
    MbtiType,
    UserProfile,
    detect_self_identification,
    filter_bots,
    load_interactions,
    load_profiles,
    parse_mbti,
)
from affinity_miner.errors import InvalidType, MalformedRecord
from affinity_miner.ingest import Sentiment


def event_line(source="a", target="b", timestamp=1, sentiment="POS", **extra):
    record = {"source": source, "target": target, "timestamp": timestamp,
              "sentiment": sentiment, **extra}
    return json.dumps(record)


class TestParseMbti:
    def test_all_16_round_trip(self):
        assert len(ALL_TYPES) == 16
        for t in ALL_TYPES:
            assert parse_mbti(str(t)) is t

    def test_case_insensitive(self):
        assert parse_mbti("infj") is MbtiType.INFJ
        assert parse_mbti("InFj") is MbtiType.INFJ

    def test_invalid_code(self):
        with pytest.raises(InvalidType):
            parse_mbti("ABCD")

    def test_axes(self):
        t = parse_mbti("INFJ")
        assert (t.attitude, t.perceiving, t.judging, t.lifestyle) == ("I", "N", "F", "J")


class TestDetectSelfIdentification:
    def test_single_code_with_marker(self):
        assert detect_self_identification("I am an INFJ #mbti") is MbtiType.INFJ

    def test_two_codes_rejected(self):
        assert detect_self_identification("INFJ or ENFP? mbti quiz") is None

    def test_no_code_no_marker(self):
        assert detect_self_identification("hello world") is None

    def test_marker_required(self):
        assert detect_self_identification("I am an INFJ") is None

    def test_marker_variants(self):
        for marker in ("MBTI", "Briggs", "myers"):
            assert detect_self_identification(f"ENTP {marker}") is MbtiType.ENTP

    def test_repeated_same_code_still_detected(self):
        assert detect_self_identification("ISTP ISTP mbti") is MbtiType.ISTP

    def test_word_boundary(self):
        assert detect_self_identification("INFJs are rare, mbti") is None

    def test_all_pairs_rejected(self):
        codes = [str(t) for t in ALL_TYPES]
        for i, a in enumerate(codes):
            for b in codes[i + 1:]:
                assert detect_self_identification(f"{a} and {b} mbti") is None


class TestFilterBots:
    def build(self, scores):
        return [UserProfile(f"u{i}", MbtiType.INFJ, s) for i, s in enumerate(scores)]

    def test_boundary_removed(self):
        kept = filter_bots(self.build([2.5]))
        assert kept == []

    def test_below_boundary_kept(self):
        kept = filter_bots(self.build([2.49, 0.0]))
        assert [p.bot_score for p in kept] == [2.49, 0.0]

    def test_order_preserved(self):
        profiles = self.build([1.0, 3.0, 0.5, 2.5, 2.0])
        kept = filter_bots(profiles)
        assert [p.user_id for p in kept] == ["u0", "u2", "u4"]

    def test_idempotent(self):
        profiles = self.build([0.1, 2.6, 1.4, 4.9, 2.5, 0.0])
        once = filter_bots(profiles)
        assert filter_bots(once) == once

    def test_threshold_range_checked(self):
        with pytest.raises(ValueError):
            filter_bots(self.build([1.0]), threshold=5.5)


class TestLoadInteractions:
    def test_basic_mapping(self):
        events = load_interactions([event_line(sentiment="POS")])
        assert len(events) == 1
        assert events[0].sentiment is Sentiment.POS

    def test_self_mention_rejected(self):
        lines = [event_line(), event_line(source="x", target="x")] + [
            event_line(timestamp=i) for i in range(2, 20)
        ]
        events = load_interactions(lines)
        assert all(e.source != e.target for e in events)
        assert len(events) == 19

    def test_tie_broken_by_input_position(self):
        lines = [
            event_line(source="first", timestamp=5),
            event_line(source="second", timestamp=5),
        ]
        events = load_interactions(lines)
        assert [e.source for e in events] == ["first", "second"]

    def test_sorted_by_timestamp(self):
        lines = [event_line(timestamp=t) for t in (5, 1, 3, 2, 4)]
        events = load_interactions(lines)
        stamps = [e.timestamp for e in events]
        assert stamps == sorted(stamps)

    def test_unknown_sentiment_rejected(self):
        lines = [event_line(sentiment="MEH")] + [event_line(timestamp=i) for i in range(20)]
        assert len(load_interactions(lines)) == 20

    def test_aggregate_error_above_ten_percent(self):
        lines = [event_line()] * 8 + ["{broken", event_line(sentiment="?")]
        with pytest.raises(MalformedRecord) as info:
            load_interactions(lines)
        assert len(info.value.line_errors) == 2

    def test_unknown_field_rejected(self):
        lines = [event_line()] * 20 + [event_line(sentimnet="POS")]
        events = load_interactions(lines)
        assert len(events) == 20

    def test_blank_lines_skipped(self):
        events = load_interactions(["", event_line(), "   "])
        assert len(events) == 1

    def test_text_optional(self):
        events = load_interactions([event_line(text="hi there")])
        assert events[0].text == "hi there"
        events = load_interactions([event_line()])
        assert events[0].text is None

    def test_non_integer_timestamp_rejected(self):
        lines = [event_line(timestamp="noon")] + [event_line(timestamp=i) for i in range(20)]
        assert len(load_interactions(lines)) == 20


class TestLoadProfiles:
    HEADER = "user_id\tmbti\tbot_score"

    def test_basic(self):
        rows = [self.HEADER, "alice\tINFJ\t0.4", "bob\tentp\t2.0"]
        profiles = load_profiles(rows)
        assert [p.user_id for p in profiles] == ["alice", "bob"]
        assert profiles[1].mbti is MbtiType.ENTP

    def test_bad_header(self):
        with pytest.raises(MalformedRecord):
            load_profiles(["id\ttype\tscore", "a\tINFJ\t0.1"])

    def test_duplicate_user_rejected(self):
        rows = [self.HEADER] + [f"u{i}\tINFJ\t0.1" for i in range(20)] + ["u0\tENTP\t0.2"]
        profiles = load_profiles(rows)
        assert len(profiles) == 20

    def test_out_of_range_score_rejected(self):
        rows = [self.HEADER] + [f"u{i}\tINFJ\t0.1" for i in range(20)] + ["bad\tINFJ\t6.0"]
        profiles = load_profiles(rows)
        assert all(p.user_id != "bad" for p in profiles)

    def test_aggregate_error(self):
        rows = [self.HEADER, "a\tINFJ\t0.1", "b\tWXYZ\t0.1"]
        with pytest.raises(MalformedRecord):
            load_profiles(rows)
