import pytest
from hypothesis import given, settings, strategies as st

from subseg.srt_io import (
    MalformedCue,
    MalformedMetadata,
    MalformedTimestamp,
    NonMonotonicTiming,
    SegmentDuration,
    Subtitle,
    SubtitleDocument,
    Timestamp,
    format_timestamp,
    load_segments_metadata,
    parse_srt,
    parse_timestamp,
    serialize_srt,
)


class TestParseTimestamp:
    @pytest.mark.parametrize(
        "text,millis",
        [
            ("00:08:57,020", 537020),
            ("00:00:00,000", 0),
            ("01:02:03,004", 3723004),  # (1*3600 + 2*60 + 3) * 1000 + 4
            ("99:59:59,999", ((99 * 60 + 59) * 60 + 59) * 1000 + 999),
        ],
    )
    def test_values(self, text, millis):
        assert parse_timestamp(text).millis == millis

    @pytest.mark.parametrize(
        "text",
        [
            "0:08:57,020",  # missing padding
            "00:08:57.020",  # dot instead of comma
            "00:60:00,000",  # minutes out of range
            "00:00:60,000",  # seconds out of range
            "00:08:57,20",  # short millis
            "00:08:57,0200",
            " 00:08:57,020",
            "garbage",
            "",
        ],
    )
    def test_rejects(self, text):
        with pytest.raises(MalformedTimestamp):
            parse_timestamp(text)

    @given(st.integers(min_value=0, max_value=99 * 3600 * 1000 + 59 * 60 * 1000 + 59 * 1000 + 999))
    def test_round_trip(self, millis):
        ts = Timestamp(millis)
        assert parse_timestamp(format_timestamp(ts)) == ts


class TestParseSrt:
    def test_figure_file(self, figure_srt):
        doc = parse_srt(figure_srt, talk_id="talk")
        assert doc.talk_id == "talk"
        assert doc.subtitles == (
            Subtitle(164, Timestamp(537020), Timestamp(538476), ("I wanted to challenge the idea",)),
            Subtitle(
                165,
                Timestamp(538500),
                Timestamp(542060),
                ("that design is but a tool", "to create function and beauty."),
            ),
        )

    def test_empty_input(self):
        assert parse_srt("") == SubtitleDocument("", ())

    def test_bom_tolerated(self, figure_srt):
        assert parse_srt("﻿" + figure_srt) == parse_srt(figure_srt)

    def test_double_space_preserved(self):
        text = "1\n00:00:00,000 --> 00:00:01,000\na tool  to create\n\n"
        doc = parse_srt(text)
        assert doc.subtitles[0].lines == ("a tool  to create",)
        assert parse_srt(serialize_srt(doc)) == doc

    def test_trailing_whitespace_stripped(self):
        text = "1\n00:00:00,000 --> 00:00:01,000\nhello   \n\n"
        assert parse_srt(text).subtitles[0].lines == ("hello",)

    def test_crlf_input(self, figure_srt):
        assert parse_srt(figure_srt.replace("\n", "\r\n")) == parse_srt(figure_srt)

    def test_missing_timing_line(self):
        with pytest.raises(MalformedCue):
            parse_srt("1\njust text\n\n")

    def test_empty_text(self):
        with pytest.raises(MalformedCue):
            parse_srt("1\n00:00:00,000 --> 00:00:01,000\n\n")

    def test_bad_index(self):
        with pytest.raises(MalformedCue):
            parse_srt("x\n00:00:00,000 --> 00:00:01,000\nhi\n\n")

    def test_cue_ending_before_start(self):
        with pytest.raises(MalformedCue):
            parse_srt("1\n00:00:02,000 --> 00:00:01,000\nhi\n\n")

    def test_bad_timestamp_propagates(self):
        with pytest.raises(MalformedTimestamp):
            parse_srt("1\n00:00:00.000 --> 00:00:01,000\nhi\n\n")

    def test_non_monotonic_start_warns(self):
        text = (
            "1\n00:00:05,000 --> 00:00:06,000\nlate\n\n"
            "2\n00:00:01,000 --> 00:00:02,000\nearly\n\n"
        )
        with pytest.warns(NonMonotonicTiming):
            doc = parse_srt(text)
        assert [s.index for s in doc.subtitles] == [1, 2]

    @given(st.text(max_size=300))
    @settings(max_examples=300)
    def test_total_over_error_contract(self, text):
        try:
            parse_srt(text)
        except (MalformedCue, MalformedTimestamp):
            pass


_line = (
    st.text(
        alphabet=st.characters(blacklist_characters="\n\r", blacklist_categories=("Cs",)),
        min_size=1,
        max_size=40,
    )
    .map(str.rstrip)
    .filter(bool)
)


@st.composite
def documents(draw):
    n = draw(st.integers(min_value=0, max_value=6))
    starts = sorted(draw(st.lists(st.integers(0, 10_000_000), min_size=n, max_size=n)))
    subtitles = []
    for i, start in enumerate(starts):
        duration = draw(st.integers(min_value=1, max_value=60_000))
        lines = tuple(draw(st.lists(_line, min_size=1, max_size=3)))
        subtitles.append(Subtitle(i + 1, Timestamp(start), Timestamp(start + duration), lines))
    talk_id = draw(st.text(max_size=10))
    return SubtitleDocument(talk_id, tuple(subtitles))


class TestSerializeSrt:
    def test_single_cue(self):
        doc = SubtitleDocument(
            "t",
            (Subtitle(164, Timestamp(537020), Timestamp(538476), ("I wanted to challenge the idea",)),),
        )
        assert serialize_srt(doc) == (
            "164\n00:08:57,020 --> 00:08:58,476\nI wanted to challenge the idea\n\n"
        )

    def test_empty_document(self):
        assert serialize_srt(SubtitleDocument("t", ())) == ""

    @given(documents())
    @settings(max_examples=200)
    def test_round_trip(self, doc):
        assert parse_srt(serialize_srt(doc), talk_id=doc.talk_id) == doc

    @given(documents())
    @settings(max_examples=100)
    def test_canonical_serialization_is_stable(self, doc):
        once = serialize_srt(doc)
        assert serialize_srt(parse_srt(once, talk_id=doc.talk_id)) == once


class TestSubtitleInvariants:
    def test_rejects_equal_start_end(self):
        with pytest.raises(ValueError):
            Subtitle(1, Timestamp(5), Timestamp(5), ("x",))

    def test_rejects_empty_lines(self):
        with pytest.raises(ValueError):
            Subtitle(1, Timestamp(0), Timestamp(1), ())

    def test_rejects_newline_in_line(self):
        with pytest.raises(ValueError):
            Subtitle(1, Timestamp(0), Timestamp(1), ("a\nb",))

    def test_rejects_non_positive_index(self):
        with pytest.raises(ValueError):
            Subtitle(0, Timestamp(0), Timestamp(1), ("x",))


class TestSegmentsMetadata:
    def test_single_entry(self):
        # duration matches the figure cue: 538,476 ms - 537,020 ms = 1.456 s
        entries = load_segments_metadata("- {duration: 1.456, offset: 537.02, wav: talk1.wav}")
        assert entries == [SegmentDuration("talk1.wav", 537.02, 1.456)]

    def test_empty_list(self):
        assert load_segments_metadata("[]") == []
        assert load_segments_metadata("") == []

    def test_two_entries_in_order(self):
        text = (
            "- {duration: 1.0, offset: 0.5, wav: a.wav}\n"
            "- {duration: 2.5, offset: 2.0, wav: b.wav}\n"
        )
        entries = load_segments_metadata(text)
        assert [e.audio_id for e in entries] == ["a.wav", "b.wav"]
        assert entries[1].duration == 2.5

    def test_audio_key_alias_and_unknown_keys(self):
        entries = load_segments_metadata(
            "- {audio: x.wav, offset: 1.0, duration: 2.0, speaker_id: spk7}"
        )
        assert entries[0].audio_id == "x.wav"

    @pytest.mark.parametrize(
        "text",
        [
            "- {offset: 1.0, duration: 2.0}",  # no audio key
            "- {wav: a.wav, duration: 2.0}",  # no offset
            "- {wav: a.wav, offset: nope, duration: 2.0}",  # non-numeric
            "- {wav: a.wav, offset: 1.0, duration: 0}",  # non-positive duration
            "not a list item",
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(MalformedMetadata):
            load_segments_metadata(text)

    def test_error_carries_line_number(self):
        good = "- {wav: a.wav, offset: 1.0, duration: 2.0}"
        with pytest.raises(MalformedMetadata) as err:
            load_segments_metadata(good + "\n- {wav: b.wav, offset: 1.0}")
        assert err.value.line_number == 2
