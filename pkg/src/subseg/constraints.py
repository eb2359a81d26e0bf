"""Spatial and temporal subtitle constraints and corpus conformity counts.

Character counts are over Unicode code points of the rendered line text
(words joined by single spaces); break symbols never count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .annotate import AnnotatedSentence, strip_breaks
from .srt_io import SegmentDuration


class NonPositiveDuration(ValueError):
    """A reading-speed check was asked over a non-positive time window."""


@dataclass(frozen=True)
class ConstraintProfile:
    """Numeric subtitle limits (Latin-script defaults)."""

    cpl_limit: int = 42
    cps_limit: float = 21.0
    max_lines_per_block: int = 2
    orphan_threshold: int = 5

    def __post_init__(self):
        for name in ("cpl_limit", "cps_limit", "max_lines_per_block", "orphan_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_PROFILE = ConstraintProfile()


def sentence_lines(sentence: AnnotatedSentence) -> list[str]:
    """Rendered display lines: maximal word runs between break symbols."""
    return [" ".join(line) for block in sentence.blocks() for line in block]


class CplCheck(NamedTuple):
    line_lengths: tuple[int, ...]
    conforming: bool


def check_cpl(sentence: AnnotatedSentence, profile: ConstraintProfile = DEFAULT_PROFILE) -> CplCheck:
    """Per-line lengths and whether every line is within the line limit."""
    lengths = tuple(len(line) for line in sentence_lines(sentence))
    return CplCheck(lengths, all(n <= profile.cpl_limit for n in lengths))


def check_block_cpl(sentence: AnnotatedSentence, limit: int) -> bool:
    """True iff every block (its lines joined by one space) is within ``limit``."""
    for block in sentence.blocks():
        joined = " ".join(" ".join(line) for line in block)
        if len(joined) > limit:
            return False
    return True


class CpsCheck(NamedTuple):
    cps: float
    conforming: bool


def check_cps(
    sentence: AnnotatedSentence,
    window: SegmentDuration,
    profile: ConstraintProfile = DEFAULT_PROFILE,
) -> CpsCheck:
    """Characters per second of the plain text over the utterance window."""
    if window.duration <= 0:
        raise NonPositiveDuration(f"duration must be positive, got {window.duration}")
    cps = len(strip_breaks(sentence)) / window.duration
    return CpsCheck(cps, cps <= profile.cps_limit)


def check_lines(sentence: AnnotatedSentence, profile: ConstraintProfile = DEFAULT_PROFILE) -> bool:
    """True iff no block has more lines than the profile allows."""
    return all(len(block) <= profile.max_lines_per_block for block in sentence.blocks())


def line_balance(sentence: AnnotatedSentence) -> list[float]:
    """Per-block min/max line-length ratio; single-line blocks score 1.0.

    Informational only: there is no pass/fail threshold for balance.
    """
    ratios = []
    for block in sentence.blocks():
        lengths = [len(" ".join(line)) for line in block]
        ratios.append(1.0 if len(lengths) < 2 else min(lengths) / max(lengths))
    return ratios


@dataclass(frozen=True)
class ConformityReport:
    """Corpus-level conformity counts at the line and block length limits.

    A sentence is line-conforming only if every one of its lines is within
    the line limit, and block-conforming only if every block fits in twice
    the line limit.
    """

    total_sentences: int
    conforming_sentences: int
    block_conforming_sentences: int
    total_lines: int
    conforming_lines: int
    sentences_with_eol: int
    worst_line_lengths: tuple[int, ...]

    def line_conformity(self) -> float:
        """Fraction of lines within the line limit (1.0 for an empty corpus)."""
        return 1.0 if self.total_lines == 0 else self.conforming_lines / self.total_lines

    def to_json_dict(self) -> dict:
        # key names reflect the default Latin limits (42 per line, 84 per block)
        return {
            "totals": {"sentences": self.total_sentences, "lines": self.total_lines},
            "conforming_42": {
                "sentences": self.conforming_sentences,
                "lines": self.conforming_lines,
            },
            "conforming_84": {"sentences": self.block_conforming_sentences},
            "with_eol": self.sentences_with_eol,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def to_text(self) -> str:
        return "\n".join(
            [
                f"sentences: {self.total_sentences}",
                f"lines: {self.total_lines}",
                f"conforming_sentences: {self.conforming_sentences}",
                f"conforming_lines: {self.conforming_lines}",
                f"block_conforming_sentences: {self.block_conforming_sentences}",
                f"sentences_with_eol: {self.sentences_with_eol}",
            ]
        )


def conformity_stats(
    corpus: Iterable[AnnotatedSentence], profile: ConstraintProfile = DEFAULT_PROFILE
) -> ConformityReport:
    """Count sentences conforming at the line limit, at twice the line limit
    (block level), and carrying at least one ``<eol>``."""
    total = conforming = block_conforming = 0
    total_lines = conforming_lines = with_eol = 0
    worst: list[int] = []
    for sentence in corpus:
        total += 1
        lengths, ok = check_cpl(sentence, profile)
        if ok:
            conforming += 1
        if check_block_cpl(sentence, 2 * profile.cpl_limit):
            block_conforming += 1
        total_lines += len(lengths)
        conforming_lines += sum(1 for n in lengths if n <= profile.cpl_limit)
        if sentence.has_eol:
            with_eol += 1
        worst.append(max(lengths, default=0))
    return ConformityReport(
        total_sentences=total,
        conforming_sentences=conforming,
        block_conforming_sentences=block_conforming,
        total_lines=total_lines,
        conforming_lines=conforming_lines,
        sentences_with_eol=with_eol,
        worst_line_lengths=tuple(worst),
    )
