"""End-to-end corpus workflows: alignment-based corpus construction,
corpus statistics, and the iterative line-break re-annotation loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .annotate import (
    AnnotatedSentence,
    GrammarViolation,
    NoAlignment,
    align_sentence,
    build_index,
    restore_eol_from_double_space,
)
from .constraints import (
    ConformityReport,
    ConstraintProfile,
    DEFAULT_PROFILE,
    check_cpl,
    check_cps,
    check_lines,
    conformity_stats,
)
from .segmenters import (
    DEFAULT_FINE_TUNE_EPOCHS,
    LinearSegmenterModel,
    TrainingConfig,
    fine_tune,
    segment_learned,
)
from .srt_io import SegmentDuration, SubtitleDocument


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs shared by the pipeline commands."""

    profile: ConstraintProfile = DEFAULT_PROFILE
    training: TrainingConfig = field(default_factory=TrainingConfig)
    fine_tune_epochs: int = DEFAULT_FINE_TUNE_EPOCHS
    iterations: int = 1
    seed: int = 0
    beam_width: int = 4

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")


@dataclass(frozen=True)
class AlignmentLogEntry:
    line_number: int
    talk_id: str
    aligned: bool
    detail: str = ""


def preprocess_document(doc: SubtitleDocument) -> SubtitleDocument:
    """Restore collapsed line breaks: single-line cues containing an internal
    double space are split back into two lines."""
    subtitles = []
    for sub in doc.subtitles:
        if len(sub.lines) == 1:
            lines = [line for line in restore_eol_from_double_space(sub.lines[0]) if line.strip()]
            if len(lines) > 1:
                sub = replace(sub, lines=tuple(lines))
        subtitles.append(sub)
    return replace(doc, subtitles=tuple(subtitles))


def build_corpus(
    docs: Iterable[SubtitleDocument],
    sentences: Iterable[tuple[str, str]],
) -> tuple[list[AnnotatedSentence], list[AlignmentLogEntry]]:
    """Align each (talk_id, sentence) pair against the indexed documents.

    Returns the successfully aligned sentences in input order plus a log
    entry per input sentence; alignment failures are logged, never fatal.
    """
    index = build_index(preprocess_document(doc) for doc in docs)
    corpus: list[AnnotatedSentence] = []
    log: list[AlignmentLogEntry] = []
    for line_number, (talk_id, text) in enumerate(sentences, start=1):
        try:
            corpus.append(align_sentence(text, talk_id, index))
            log.append(AlignmentLogEntry(line_number, talk_id, aligned=True))
        except NoAlignment as exc:
            log.append(AlignmentLogEntry(line_number, talk_id, aligned=False, detail=exc.reason))
    return corpus, log


def reannotation_filter(candidate: AnnotatedSentence, profile: ConstraintProfile) -> bool:
    """Accept a re-annotation only if it is length-conforming, gained at
    least one line break, and no block exceeds the allowed line count."""
    return (
        candidate.has_eol
        and check_cpl(candidate, profile).conforming
        and check_lines(candidate, profile)
    )


@dataclass(frozen=True)
class IterationReport:
    iteration: int
    selected: int
    accepted: int
    conformity_before: float
    conformity_after: float
    pool_size: int

    def to_json_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "selected": self.selected,
            "accepted": self.accepted,
            "conformity_before": self.conformity_before,
            "conformity_after": self.conformity_after,
            "pool_size": self.pool_size,
        }


def _line_conformity(sentences: Sequence[AnnotatedSentence], profile: ConstraintProfile) -> float:
    return conformity_stats(sentences, profile).line_conformity()


def reannotate(
    corpus: Iterable[AnnotatedSentence],
    model: LinearSegmenterModel,
    profile: ConstraintProfile = DEFAULT_PROFILE,
    config: PipelineConfig | None = None,
) -> tuple[list[AnnotatedSentence], LinearSegmenterModel, list[IterationReport]]:
    """Iteratively re-annotate over-long sentences with missing line breaks.

    Each iteration fine-tunes the base ``model`` on the pool of sentences
    that carry ``<eol>`` (initially those already in the corpus), segments
    every sentence failing the per-line length check with the block
    structure frozen, keeps only outputs accepted by
    :func:`reannotation_filter`, and folds them back into both the corpus
    and the pool.  The loop stops early once nothing is selected or
    accepted, and corpus line conformity never decreases.
    """
    if config is None:
        config = PipelineConfig(profile=profile)
    sentences = list(corpus)
    pool = [s for s in sentences if s.has_eol]
    reports: list[IterationReport] = []
    current_model = model
    ft_config = replace(config.training, epochs=config.fine_tune_epochs)

    for iteration in range(1, config.iterations + 1):
        before = _line_conformity(sentences, profile)
        selected = [i for i, s in enumerate(sentences) if not check_cpl(s, profile).conforming]
        if not selected or not pool:
            reports.append(
                IterationReport(iteration, len(selected), 0, before, before, len(pool))
            )
            break
        current_model = fine_tune(model, pool, ft_config, profile)
        accepted = 0
        fresh: list[AnnotatedSentence] = []
        for i in selected:
            try:
                candidate = segment_learned(
                    current_model, sentences[i], profile, mode="eol_only",
                    beam_width=config.beam_width,
                )
            except GrammarViolation:
                continue
            if reannotation_filter(candidate, profile):
                sentences[i] = candidate
                fresh.append(candidate)
                accepted += 1
        pool.extend(fresh)
        after = _line_conformity(sentences, profile)
        reports.append(
            IterationReport(iteration, len(selected), accepted, before, after, len(pool))
        )
        if accepted == 0:
            break
    return sentences, current_model, reports


@dataclass(frozen=True)
class CorpusStats:
    """Corpus size and conformity summary; CPS fields are present only when
    duration metadata was supplied."""

    sentences: int
    words: int
    conformity: ConformityReport
    eol_fraction: float
    orphan_lines: int
    cps_measured: int | None = None
    cps_conforming: int | None = None

    def to_json_dict(self) -> dict:
        data = {
            "sentences": self.sentences,
            "words": self.words,
            "eol_fraction": self.eol_fraction,
            "orphan_lines": self.orphan_lines,
            "conformity": self.conformity.to_json_dict(),
        }
        if self.cps_measured is not None:
            data["cps"] = {"measured": self.cps_measured, "conforming": self.cps_conforming}
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def to_text(self) -> str:
        lines = [
            f"sentences: {self.sentences}",
            f"words: {self.words}",
            f"eol_fraction: {self.eol_fraction:.4f}",
            f"orphan_lines: {self.orphan_lines}",
        ]
        lines.extend(self.conformity.to_text().splitlines()[2:])
        if self.cps_measured is not None:
            lines.append(f"cps_measured: {self.cps_measured}")
            lines.append(f"cps_conforming: {self.cps_conforming}")
        return "\n".join(lines)


def stats(
    corpus: Iterable[AnnotatedSentence],
    metadata: Sequence[SegmentDuration] | None = None,
    profile: ConstraintProfile = DEFAULT_PROFILE,
) -> CorpusStats:
    """Sentence/word counts (break symbols excluded), conformity counts, the
    fraction of sentences carrying ``<eol>``, and reading speed when
    duration metadata aligns 1:1 with the corpus."""
    sentences = list(corpus)
    report = conformity_stats(sentences, profile)
    words = sum(len(s.words) for s in sentences)
    eol_fraction = 0.0 if not sentences else report.sentences_with_eol / len(sentences)
    orphan_lines = sum(
        1
        for s in sentences
        for length in check_cpl(s, profile).line_lengths
        if length < profile.orphan_threshold
    )
    cps_measured = cps_conforming = None
    if metadata is not None and len(metadata) == len(sentences):
        cps_measured = len(sentences)
        cps_conforming = sum(
            1 for s, window in zip(sentences, metadata) if check_cps(s, window, profile).conforming
        )
    return CorpusStats(
        sentences=len(sentences),
        words=words,
        conformity=report,
        eol_fraction=eol_fraction,
        orphan_lines=orphan_lines,
        cps_measured=cps_measured,
        cps_conforming=cps_conforming,
    )
