"""Subtitle-break segmenters.

Two ways to annotate a plain sentence with ``<eol>`` / ``<eob>`` symbols:

* a character-count baseline that consumes characters until the line limit
  would be exceeded and then breaks after the last word that fit, and
* a trainable linear gap classifier (averaged perceptron) decoded left to
  right under hard grammar constraints.

Both label the gap after each word with one of NONE / EOL / EOB and never
touch the words, so the output text always equals the normalized input.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Mapping, Sequence

from .annotate import (
    AnnotatedSentence,
    BreakToken,
    EOL_SYMBOL,
    GrammarViolation,
    extract_breaks,
    normalize_text,
)
from .constraints import ConstraintProfile, DEFAULT_PROFILE

DEFAULT_EPOCHS = 12
DEFAULT_FINE_TUNE_EPOCHS = 6
DEFAULT_BEAM_WIDTH = 4

MODEL_FORMAT_VERSION = 1


class WordTooLong(ValueError):
    """A single word exceeds the line limit, so no line can contain it."""

    def __init__(self, word: str):
        super().__init__(f"word longer than the line limit: {word!r}")
        self.word = word


class EmptyCorpus(ValueError):
    """Training was asked over an empty corpus or subset."""


class SubsetViolation(ValueError):
    """A fine-tuning sentence does not contain any line break."""


class ModelFormatError(ValueError):
    """A persisted model has an unknown version or a broken record."""


class GapLabel(IntEnum):
    """Decision for the gap after a word."""

    NONE = 0
    EOL = 1
    EOB = 2

    @property
    def break_token(self) -> BreakToken | None:
        if self is GapLabel.EOL:
            return BreakToken.EOL
        if self is GapLabel.EOB:
            return BreakToken.EOB
        return None


_LABEL_FOR_BREAK = {BreakToken.EOL: GapLabel.EOL, BreakToken.EOB: GapLabel.EOB}

_ALL_LABELS = (GapLabel.NONE, GapLabel.EOL, GapLabel.EOB)
_EOL_ONLY_LABELS = (GapLabel.NONE, GapLabel.EOL)


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = DEFAULT_EPOCHS
    learning_rate: float = 1.0
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate < 0:
            raise ValueError(f"learning rate must be non-negative, got {self.learning_rate}")


@dataclass(frozen=True)
class TrainingMeta:
    epochs: int
    learning_rate: float
    seed: int
    fine_tuned: bool


@dataclass(frozen=True)
class LinearSegmenterModel:
    """Sparse multiclass weights over (feature, gap label) pairs.

    The feature vocabulary is closed after training: unseen features simply
    score zero.  Models are immutable once trained and safe to decode with
    concurrently.
    """

    weights: dict[tuple[str, GapLabel], float]
    feature_vocabulary: frozenset[str]
    meta: TrainingMeta


_PUNCTUATION = set(".,;:!?…\"')»]}")


def _length_bucket(chars: int) -> int:
    return min(chars // 4, 15)


def extract_features(
    words: Sequence[str],
    gap: int,
    chars_since_break: int,
    prev_break: GapLabel,
    profile: ConstraintProfile = DEFAULT_PROFILE,
) -> list[str]:
    """Deterministic feature strings for the gap after ``words[gap - 1]``.

    Covers the line budget (bucketed characters on the current line and to
    the sentence end, and whether appending the next word would overflow the
    line limit), local lexical identity, punctuation on the current word,
    the previous break kind and the relative position in the sentence.
    """
    if not 1 <= gap <= len(words):
        raise ValueError(f"gap must be in 1..{len(words)}, got {gap}")
    word = words[gap - 1]
    nxt = words[gap] if gap < len(words) else None
    punct = word[-1] in _PUNCTUATION
    tail = word[-1] if punct else ""
    since_bucket = _length_bucket(chars_since_break)
    if nxt is None:
        overflow = False
        to_end = 0
    else:
        overflow = chars_since_break + 1 + len(nxt) > profile.cpl_limit
        to_end = sum(len(w) + 1 for w in words[gap:]) - 1
    features = [
        f"since={since_bucket}",
        f"to_end={_length_bucket(to_end)}",
        f"w={word}",
        f"wlen={len(word)}",
        f"n={nxt if nxt is not None else '</s>'}",
        f"nlen={len(nxt) if nxt is not None else 0}",
        f"punct={int(punct)}",
        f"tail={tail}",
        f"prev={prev_break.name}",
        f"pos={(10 * gap) // len(words)}",
        f"over={int(overflow)}",
        f"over&punct={int(overflow)}&{int(punct)}",
        f"since&prev={since_bucket}&{prev_break.name}",
        f"punct&tail&since={int(punct)}&{tail}&{since_bucket}",
    ]
    if nxt is None:
        features.append("end_of_sentence")
    return features


def _labels_to_sentence(words: Sequence[str], labels: Sequence[GapLabel]) -> AnnotatedSentence:
    items: list[str | BreakToken] = []
    for word, label in zip(words, labels):
        items.append(word)
        token = label.break_token
        if token is not None:
            items.append(token)
    return AnnotatedSentence(tuple(items))


def _gold_labels(sentence: AnnotatedSentence) -> tuple[GapLabel, ...]:
    labels = [GapLabel.NONE] * len(sentence.words)
    for position in extract_breaks(sentence):
        labels[position.gap - 1] = _LABEL_FOR_BREAK[position.kind]
    return tuple(labels)


def segment_count_char(
    sentence: str, profile: ConstraintProfile = DEFAULT_PROFILE, seed: int = 0
) -> AnnotatedSentence:
    """Greedy character-count segmentation.

    Consume words until adding the next one would push the current line past
    the line limit, then insert a break after the last word that fit.  After
    an ``<eob>`` the break kind is drawn at random between ``<eob>`` and
    ``<eol>`` (a sentence starts a fresh screen, so the first draw is
    random too); after an ``<eol>`` it is forced to ``<eob>``, which keeps
    blocks at two lines.  The final break is always ``<eob>``.
    """
    words = normalize_text(sentence).split()
    if not words:
        raise ValueError("sentence must be non-empty")
    for word in words:
        if len(word) > profile.cpl_limit:
            raise WordTooLong(word)

    rng = random.Random(seed)
    labels = [GapLabel.NONE] * len(words)
    prev = GapLabel.EOB
    line_chars = len(words[0])
    for j in range(1, len(words)):
        if line_chars + 1 + len(words[j]) > profile.cpl_limit:
            if prev is GapLabel.EOB:
                kind = rng.choice((GapLabel.EOB, GapLabel.EOL))
            else:
                kind = GapLabel.EOB
            labels[j - 1] = kind
            prev = kind
            line_chars = len(words[j])
        else:
            line_chars += 1 + len(words[j])
    labels[-1] = GapLabel.EOB

    # safety pass: promote any line break that would yield a >2-line block
    eols_in_block = 0
    for i, label in enumerate(labels):
        if label is GapLabel.EOL:
            if eols_in_block + 2 > profile.max_lines_per_block:
                labels[i] = GapLabel.EOB
                eols_in_block = 0
            else:
                eols_in_block += 1
        elif label is GapLabel.EOB:
            eols_in_block = 0
    return _labels_to_sentence(words, labels)


def _legal_labels(
    gap: int,
    total_gaps: int,
    eols_in_block: int,
    frozen: Mapping[int, GapLabel],
    open_labels: tuple[GapLabel, ...],
    profile: ConstraintProfile,
) -> tuple[GapLabel, ...]:
    forced = frozen.get(gap)
    if forced is not None:
        return (forced,)
    if gap == total_gaps:
        return (GapLabel.EOB,)
    if eols_in_block + 2 > profile.max_lines_per_block:
        return tuple(label for label in open_labels if label is not GapLabel.EOL)
    return open_labels


def _score_row(
    cache: dict,
    words: Sequence[str],
    weights: Mapping[tuple[str, GapLabel], float],
    profile: ConstraintProfile,
    gap: int,
    chars: int,
    prev: GapLabel,
) -> dict[GapLabel, float]:
    key = (gap, chars, prev)
    row = cache.get(key)
    if row is None:
        features = extract_features(words, gap, chars, prev, profile)
        row = {
            label: sum(weights.get((feature, label), 0.0) for feature in features)
            for label in _ALL_LABELS
        }
        cache[key] = row
    return row


def _beam_pass(
    words: Sequence[str],
    weights: Mapping[tuple[str, GapLabel], float],
    profile: ConstraintProfile,
    frozen: Mapping[int, GapLabel],
    open_labels: tuple[GapLabel, ...],
    width: int,
    cache: dict,
) -> tuple[tuple[float, tuple[GapLabel, ...]], bool]:
    """One left-to-right beam pass over merged decoder states.

    States with the same (line characters, previous break, line count) are
    merged keeping the better score, so the pass is exact whenever the
    frontier never outgrows ``width`` (reported via the second value).
    """
    total_gaps = len(words)
    # state key: (chars on current line, previous break kind, eols in block)
    frontier: dict[tuple[int, GapLabel, int], tuple[float, tuple[GapLabel, ...]]] = {
        (len(words[0]), GapLabel.EOB, 0): (0.0, ())
    }
    pruned = False
    for gap in range(1, total_gaps + 1):
        expanded: dict[tuple[int, GapLabel, int], tuple[float, tuple[GapLabel, ...]]] = {}
        for (chars, prev, eols), (score, labels) in frontier.items():
            row = _score_row(cache, words, weights, profile, gap, chars, prev)
            for label in _legal_labels(gap, total_gaps, eols, frozen, open_labels, profile):
                gained = score + row[label]
                if gap < total_gaps:
                    next_len = len(words[gap])
                    if label is GapLabel.NONE:
                        key = (chars + 1 + next_len, prev, eols)
                    elif label is GapLabel.EOL:
                        key = (next_len, GapLabel.EOL, eols + 1)
                    else:
                        key = (next_len, GapLabel.EOB, 0)
                else:
                    key = (0, label if label is not GapLabel.NONE else prev, 0)
                candidate = (gained, labels + (label,))
                held = expanded.get(key)
                if held is None or _beats(candidate, held):
                    expanded[key] = candidate
        if len(expanded) > width:
            pruned = True
            kept = sorted(expanded.items(), key=lambda kv: (-kv[1][0], kv[1][1]))[:width]
            frontier = dict(kept)
        else:
            frontier = expanded
    best = min(frontier.values(), key=lambda sv: (-sv[0], sv[1]))
    return best, pruned


def _beats(a: tuple[float, tuple[GapLabel, ...]], b: tuple[float, tuple[GapLabel, ...]]) -> bool:
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


def _decode(
    words: Sequence[str],
    weights: Mapping[tuple[str, GapLabel], float],
    profile: ConstraintProfile,
    frozen: Mapping[int, GapLabel],
    open_labels: tuple[GapLabel, ...],
    beam_width: int,
) -> tuple[tuple[GapLabel, ...], float]:
    """Constrained decode; a wider beam never returns a worse-scoring path.

    The result is the best path over beam passes of width 1..``beam_width``
    (passes stop early once a width prunes nothing, since wider ones would
    be identical).  Width 1 is therefore exactly the greedy decode.
    """
    best: tuple[float, tuple[GapLabel, ...]] | None = None
    cache: dict = {}
    for width in range(1, max(1, beam_width) + 1):
        result, pruned = _beam_pass(words, weights, profile, frozen, open_labels, width, cache)
        if best is None or _beats(result, best):
            best = result
        if not pruned:
            break
    assert best is not None
    return best[1], best[0]


def _path_steps(
    words: Sequence[str],
    labels: Sequence[GapLabel],
    profile: ConstraintProfile,
) -> Iterable[tuple[list[str], GapLabel]]:
    """Feature/label pairs along a fixed label path (teacher forcing)."""
    chars = len(words[0])
    prev = GapLabel.EOB
    eols = 0
    for gap in range(1, len(words) + 1):
        label = labels[gap - 1]
        yield extract_features(words, gap, chars, prev, profile), label
        if gap < len(words):
            next_len = len(words[gap])
            if label is GapLabel.NONE:
                chars += 1 + next_len
            elif label is GapLabel.EOL:
                chars, prev, eols = next_len, GapLabel.EOL, eols + 1
            else:
                chars, prev, eols = next_len, GapLabel.EOB, 0


class _AveragedWeights:
    """Sparse weight vector with lazily accumulated per-step averages.

    A snapshot of every weight is (conceptually) taken after each step; the
    stamp of a key is the first snapshot its current value covers, so sums
    only need touching when a key actually changes.
    """

    def __init__(self, initial: Mapping[tuple[str, GapLabel], float] = ()):
        self.weights: dict[tuple[str, GapLabel], float] = dict(initial)
        self._sums: dict[tuple[str, GapLabel], float] = {}
        self._stamp: dict[tuple[str, GapLabel], int] = {}
        self.step = 0

    def bump(self, key: tuple[str, GapLabel], delta: float) -> None:
        current = self.weights.get(key, 0.0)
        covered = self.step - self._stamp.get(key, 1)
        self._sums[key] = self._sums.get(key, 0.0) + covered * current
        self._stamp[key] = self.step
        self.weights[key] = current + delta

    def averaged(self) -> dict[tuple[str, GapLabel], float]:
        """Mean weight vector over the snapshots taken after every step."""
        if self.step == 0:
            return {k: v for k, v in self.weights.items() if v != 0.0}
        averages: dict[tuple[str, GapLabel], float] = {}
        for key, current in self.weights.items():
            total = self._sums.get(key, 0.0)
            total += (self.step - self._stamp.get(key, 1) + 1) * current
            value = total / self.step
            if value != 0.0:
                averages[key] = value
        return averages


def _run_perceptron(
    initial: Mapping[tuple[str, GapLabel], float],
    sentences: Sequence[AnnotatedSentence],
    config: TrainingConfig,
    profile: ConstraintProfile,
    fine_tuned: bool,
) -> LinearSegmenterModel:
    state = _AveragedWeights(initial)
    vocabulary: set[str] = set(feature for feature, _ in initial)
    rng = random.Random(config.seed)
    order = list(range(len(sentences)))
    gold_cache = [(s.words, _gold_labels(s)) for s in sentences]

    for _ in range(config.epochs):
        if config.shuffle:
            rng.shuffle(order)
        mistakes = 0
        for i in order:
            state.step += 1
            words, gold = gold_cache[i]
            # update against the same beam decode used at inference time
            predicted, _ = _decode(
                words, state.weights, profile, {}, _ALL_LABELS, beam_width=DEFAULT_BEAM_WIDTH
            )
            if predicted != gold:
                mistakes += 1
                for features, label in _path_steps(words, gold, profile):
                    for feature in features:
                        vocabulary.add(feature)
                        state.bump((feature, label), config.learning_rate)
                for features, label in _path_steps(words, predicted, profile):
                    for feature in features:
                        vocabulary.add(feature)
                        state.bump((feature, label), -config.learning_rate)
        if mistakes == 0:
            break  # weights are now fixed points; further epochs cannot change them

    return LinearSegmenterModel(
        weights=state.averaged(),
        feature_vocabulary=frozenset(vocabulary),
        meta=TrainingMeta(
            epochs=config.epochs,
            learning_rate=config.learning_rate,
            seed=config.seed,
            fine_tuned=fine_tuned,
        ),
    )


def train(
    corpus: Iterable[AnnotatedSentence],
    config: TrainingConfig = TrainingConfig(),
    profile: ConstraintProfile = DEFAULT_PROFILE,
) -> LinearSegmenterModel:
    """Train the gap classifier with the averaged perceptron.

    Every sentence must be strict; each epoch decodes every sentence with
    the current weights and updates toward the gold path on mistakes.
    Deterministic under a fixed config (shuffling uses ``config.seed``).
    """
    sentences = list(corpus)
    if not sentences:
        raise EmptyCorpus("training corpus is empty")
    for sentence in sentences:
        sentence.validate_strict(profile.max_lines_per_block)
    return _run_perceptron({}, sentences, config, profile, fine_tuned=False)


def fine_tune(
    model: LinearSegmenterModel,
    eol_subset: Iterable[AnnotatedSentence],
    config: TrainingConfig | None = None,
    profile: ConstraintProfile = DEFAULT_PROFILE,
) -> LinearSegmenterModel:
    """Continue training from ``model`` on sentences that all contain ``<eol>``."""
    sentences = list(eol_subset)
    if not sentences:
        raise EmptyCorpus("fine-tuning subset is empty")
    for i, sentence in enumerate(sentences):
        if not sentence.has_eol:
            raise SubsetViolation(f"sentence {i} has no {EOL_SYMBOL}")
        sentence.validate_strict(profile.max_lines_per_block)
    if config is None:
        config = TrainingConfig(epochs=DEFAULT_FINE_TUNE_EPOCHS)
    return _run_perceptron(model.weights, sentences, config, profile, fine_tuned=True)


def segment_learned(
    model: LinearSegmenterModel,
    sentence: str | AnnotatedSentence,
    profile: ConstraintProfile = DEFAULT_PROFILE,
    mode: str = "full",
    beam_width: int = DEFAULT_BEAM_WIDTH,
) -> AnnotatedSentence:
    """Segment ``sentence`` with a constrained left-to-right beam decode.

    Breaks already present in the input are frozen and never moved.  In
    ``full`` mode every other gap may take NONE/EOL/EOB and the final gap is
    forced to EOB; in ``eol_only`` mode the input must already end in
    ``<eob>`` and open gaps only choose between NONE and EOL, so the block
    structure is untouched.  A line break is never an option once a block
    has reached the allowed number of lines, so the decode always yields a
    grammatical sentence.
    """
    if mode not in ("full", "eol_only"):
        raise ValueError(f"mode must be 'full' or 'eol_only', got {mode!r}")
    if isinstance(sentence, str):
        annotated = AnnotatedSentence.from_text(sentence)
    else:
        annotated = sentence
    words = annotated.words
    if not words:
        raise ValueError("sentence has no words")

    breaks = extract_breaks(annotated)
    if breaks:
        # frozen breaks must not already violate the grammar we guarantee
        for block in annotated.blocks():
            if len(block) > profile.max_lines_per_block:
                raise GrammarViolation(
                    f"input block has {len(block)} lines (max {profile.max_lines_per_block})"
                )
        if breaks[-1].gap == len(words) and breaks[-1].kind is BreakToken.EOL:
            raise GrammarViolation(f"input must not end with {EOL_SYMBOL}")
    frozen = {position.gap: _LABEL_FOR_BREAK[position.kind] for position in breaks}

    if mode == "eol_only":
        if annotated.items and annotated.items[-1] is not BreakToken.EOB:
            raise GrammarViolation("eol_only input must already end with <eob>")
        open_labels = _EOL_ONLY_LABELS
    else:
        open_labels = _ALL_LABELS

    labels, _ = _decode(words, model.weights, profile, frozen, open_labels, beam_width)
    return _labels_to_sentence(words, labels)


def dump_model(model: LinearSegmenterModel) -> str:
    """Serialize a model to the versioned line-oriented text format."""
    lines = [
        f"version\t{MODEL_FORMAT_VERSION}",
        f"epochs\t{model.meta.epochs}",
        f"learning_rate\t{model.meta.learning_rate!r}",
        f"seed\t{model.meta.seed}",
        f"fine_tuned\t{'true' if model.meta.fine_tuned else 'false'}",
        "weights",
    ]
    records = sorted(
        ((feature, label, value) for (feature, label), value in model.weights.items() if value != 0.0),
        key=lambda record: (record[0], record[1].name),
    )
    lines.extend(f"{feature}\t{label.name}\t{value!r}" for feature, label, value in records)
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> LinearSegmenterModel:
    """Load a model from the text format; unknown versions fail loudly."""
    lines = text.splitlines()
    header: dict[str, str] = {}
    body_start = None
    for i, line in enumerate(lines):
        if line == "weights":
            body_start = i + 1
            break
        key, sep, value = line.partition("\t")
        if not sep:
            raise ModelFormatError(f"bad header line {line!r}")
        header[key] = value
    if body_start is None:
        raise ModelFormatError("missing weights section")
    if header.get("version") != str(MODEL_FORMAT_VERSION):
        raise ModelFormatError(f"unknown model version {header.get('version')!r}")
    try:
        meta = TrainingMeta(
            epochs=int(header["epochs"]),
            learning_rate=float(header["learning_rate"]),
            seed=int(header["seed"]),
            fine_tuned=header["fine_tuned"] == "true",
        )
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"bad header: {exc}") from None

    weights: dict[tuple[str, GapLabel], float] = {}
    for line in lines[body_start:]:
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ModelFormatError(f"bad weight record {line!r}")
        feature, label_name, value_text = parts
        try:
            label = GapLabel[label_name]
            value = float(value_text)
        except (KeyError, ValueError):
            raise ModelFormatError(f"bad weight record {line!r}") from None
        weights[(feature, label)] = value
    vocabulary = frozenset(feature for feature, _ in weights)
    return LinearSegmenterModel(weights=weights, feature_vocabulary=vocabulary, meta=meta)


def save_model(model: LinearSegmenterModel, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_model(model))


def load_model(path) -> LinearSegmenterModel:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read())
