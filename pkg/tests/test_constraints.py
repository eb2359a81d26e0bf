import pytest
from hypothesis import given, settings, strategies as st

from subseg.annotate import AnnotatedSentence
from subseg.constraints import (
    ConformityReport,
    ConstraintProfile,
    NonPositiveDuration,
    check_block_cpl,
    check_cpl,
    check_cps,
    check_lines,
    conformity_stats,
    line_balance,
    sentence_lines,
)
from subseg.srt_io import SegmentDuration

from test_annotate import strict_sentences

PROFILE = ConstraintProfile()


def sent(text):
    return AnnotatedSentence.from_text(text)


class TestProfile:
    def test_defaults(self):
        assert (PROFILE.cpl_limit, PROFILE.cps_limit) == (42, 21.0)
        assert (PROFILE.max_lines_per_block, PROFILE.orphan_threshold) == (2, 5)

    @pytest.mark.parametrize("kwargs", [{"cpl_limit": 0}, {"cps_limit": -1.0}])
    def test_rejects_non_positive_limits(self, kwargs):
        with pytest.raises(ValueError):
            ConstraintProfile(**kwargs)


class TestCheckCpl:
    def test_figure_cue_lines(self):
        result = check_cpl(sent("that design is but a tool <eol> to create function and beauty. <eob>"))
        assert result.line_lengths == (25, 30)
        assert result.conforming

    def test_empty_sentence_vacuously_conforms(self):
        result = check_cpl(sent(""))
        assert result.line_lengths == ()
        assert result.conforming

    def test_boundary_just_over(self):
        word = "x" * 43
        assert not check_cpl(AnnotatedSentence((word,))).conforming
        assert check_cpl(AnnotatedSentence(("x" * 42,))).conforming

    def test_counts_spaces_not_breaks(self):
        with_break = sent("ab cd <eob> ef <eob>")
        assert check_cpl(with_break).line_lengths == (5, 2)


class TestCheckBlockCpl:
    def test_figure_block_at_84(self):
        block = sent("that design is but a tool <eol> to create function and beauty. <eob>")
        assert check_block_cpl(block, 84)
        assert not check_block_cpl(block, 55)  # the block holds 56 characters

    def test_empty_sentence(self):
        assert check_block_cpl(sent(""), 84)

    def test_boundary_at_85(self):
        lines = "x" * 42 + " <eol> " + "y" * 42 + " <eob>"  # 42 + 1 + 42 = 85
        assert not check_block_cpl(sent(lines), 84)
        assert check_block_cpl(sent(lines), 85)


class TestCheckCps:
    def test_figure_cue(self):
        # 30 characters over 538.476 - 537.020 = 1.456 seconds
        sentence = sent("I wanted to challenge the idea <eob>")
        result = check_cps(sentence, SegmentDuration("w", 537.02, 1.456))
        assert result.cps == pytest.approx(30 / 1.456, abs=1e-9)
        assert result.cps == pytest.approx(20.60, abs=0.01)
        assert result.conforming

    def test_empty_sentence(self):
        result = check_cps(sent(""), SegmentDuration("w", 0.0, 1.0))
        assert result == (0.0, True)

    def test_over_limit(self):
        result = check_cps(AnnotatedSentence(("x" * 43,)), SegmentDuration("w", 0.0, 1.0))
        assert result.cps == 43.0
        assert not result.conforming

    def test_non_positive_duration(self):
        window = SegmentDuration("w", 0.0, 1.0)
        object.__setattr__(window, "duration", 0.0)
        with pytest.raises(NonPositiveDuration):
            check_cps(sent("a <eob>"), window)

    @given(strict_sentences(), st.floats(min_value=0.1, max_value=100.0))
    @settings(max_examples=100)
    def test_scales_linearly(self, sentence, duration):
        one = check_cps(sentence, SegmentDuration("w", 0.0, duration)).cps
        two = check_cps(sentence, SegmentDuration("w", 0.0, 2 * duration)).cps
        assert two == pytest.approx(one / 2)


class TestCheckLinesAndBalance:
    def test_figure_sentence(self, figure_annotated):
        assert check_lines(sent(figure_annotated))

    def test_lenient_single_block(self):
        assert check_lines(sent("no breaks at all"))

    def test_three_line_block_fails(self):
        assert not check_lines(sent("a <eol> b <eol> c <eob>"))

    def test_balance_of_figure_block(self):
        ratios = line_balance(sent("that design is but a tool <eol> to create function and beauty. <eob>"))
        assert ratios == [pytest.approx(25 / 30)]

    def test_balance_single_line(self):
        assert line_balance(sent("hello world <eob>")) == [1.0]

    def test_balance_uneven(self):
        ratios = line_balance(sent("x" * 10 + " <eol> " + "y" * 40 + " <eob>"))
        assert ratios == [0.25]


class TestConformityStats:
    def test_figure_corpus(self, figure_annotated):
        report = conformity_stats([sent(figure_annotated)])
        assert report.total_sentences == 1
        assert report.conforming_sentences == 1
        assert report.block_conforming_sentences == 1
        assert report.sentences_with_eol == 1
        assert report.worst_line_lengths == (30,)

    def test_empty_corpus(self):
        report = conformity_stats([])
        assert report == ConformityReport(0, 0, 0, 0, 0, 0, ())
        assert report.line_conformity() == 1.0

    def test_mixed_corpus(self):
        good = sent("short line <eob>")
        bad = AnnotatedSentence(("x" * 43, "y" * 43))
        report = conformity_stats([good] * 7 + [bad] * 3)
        assert report.total_sentences == 10
        assert report.conforming_sentences == 7
        assert report.total_lines == 10
        assert report.conforming_lines == 7
        assert report.worst_line_lengths == (10,) * 7 + (87,) * 3

    def test_json_keys(self):
        data = conformity_stats([sent("a <eob>")]).to_json_dict()
        assert set(data) == {"totals", "conforming_42", "conforming_84", "with_eol"}

    @given(strict_sentences(), st.integers(min_value=1, max_value=60))
    @settings(max_examples=150)
    def test_raising_limit_is_monotone(self, sentence, limit):
        small = ConstraintProfile(cpl_limit=limit)
        large = ConstraintProfile(cpl_limit=limit + 5)
        if check_cpl(sentence, small).conforming:
            assert check_cpl(sentence, large).conforming

    @given(strict_sentences())
    @settings(max_examples=150)
    def test_line_limit_implies_block_limit(self, sentence):
        # lines a, b <= L means a + 1 + b <= 2L + 1 for two-line blocks
        limit = max(check_cpl(sentence).line_lengths, default=0)
        profile = ConstraintProfile(cpl_limit=max(limit, 1))
        if check_cpl(sentence, profile).conforming and check_lines(sentence, profile):
            assert check_block_cpl(sentence, 2 * profile.cpl_limit + 1)

    @given(strict_sentences())
    @settings(max_examples=100)
    def test_breaks_never_count_as_characters(self, sentence):
        total_line_chars = sum(check_cpl(sentence).line_lengths)
        lines = sentence_lines(sentence)
        plain_chars = len(" ".join(sentence.words))
        assert total_line_chars == plain_chars - (len(lines) - 1 if lines else 0)
