"""Command-line interface.

Subcommands: build-corpus, train, fine-tune, segment, evaluate, stats,
reannotate.  All randomness flows from ``--seed``, so identical inputs and
seed produce byte-identical outputs.  Exit status is 0 on success, 1 on an
operational error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Sequence

from .annotate import AnnotatedSentence, GrammarViolation, InvalidGap, NoAlignment
from .constraints import ConstraintProfile
from .evaluation import TextMismatch, evaluate
from .pipeline import PipelineConfig, build_corpus, reannotate, stats
from .segmenters import (
    EmptyCorpus,
    ModelFormatError,
    SubsetViolation,
    TrainingConfig,
    WordTooLong,
    load_model,
    save_model,
    segment_count_char,
    segment_learned,
    train,
    fine_tune,
)
from .srt_io import (
    MalformedCue,
    MalformedMetadata,
    MalformedTimestamp,
    load_segments_metadata,
    parse_srt,
)

_OPERATIONAL_ERRORS = (
    OSError,
    MalformedCue,
    MalformedTimestamp,
    MalformedMetadata,
    GrammarViolation,
    InvalidGap,
    NoAlignment,
    WordTooLong,
    EmptyCorpus,
    SubsetViolation,
    ModelFormatError,
    TextMismatch,
    ValueError,
)


def _parse_key_values(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _load_profile(path: str | None) -> ConstraintProfile:
    if path is None:
        return ConstraintProfile()
    values = _parse_key_values(path)
    kwargs = {}
    for key in ("cpl_limit", "max_lines_per_block", "orphan_threshold"):
        if key in values:
            kwargs[key] = int(values[key])
    if "cps_limit" in values:
        kwargs["cps_limit"] = float(values["cps_limit"])
    unknown = set(values) - {"cpl_limit", "cps_limit", "max_lines_per_block", "orphan_threshold"}
    if unknown:
        raise ValueError(f"{path}: unknown profile keys {sorted(unknown)}")
    return ConstraintProfile(**kwargs)


def _settings(args: argparse.Namespace) -> dict[str, str]:
    return _parse_key_values(args.config) if args.config else {}


def _pick(args_value, settings: dict[str, str], key: str, cast, default):
    if args_value is not None:
        return args_value
    if key in settings:
        return cast(settings[key])
    return default


def _training_config(args: argparse.Namespace, default_epochs: int) -> TrainingConfig:
    settings = _settings(args)
    return TrainingConfig(
        epochs=_pick(getattr(args, "epochs", None), settings, "epochs", int, default_epochs),
        learning_rate=_pick(
            getattr(args, "learning_rate", None), settings, "learning_rate", float, 1.0
        ),
        seed=_pick(args.seed, settings, "seed", int, 0),
        shuffle=not getattr(args, "no_shuffle", False),
    )


def _read_corpus(path: str) -> list[AnnotatedSentence]:
    sentences = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if raw.strip():
            sentences.append(AnnotatedSentence.from_text(raw))
    return sentences


def _write_lines(path: str, lines: Iterable[str]) -> None:
    Path(path).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def _cmd_build_corpus(args: argparse.Namespace) -> int:
    if args.profile:
        _load_profile(args.profile)  # validated; alignment itself is profile-independent
    docs = []
    for srt_path in sorted(Path(args.srt_dir).glob("*.srt")):
        docs.append(parse_srt(srt_path.read_text(encoding="utf-8"), talk_id=srt_path.stem))
    sentences = []
    for line_number, raw in enumerate(
        Path(args.sentences).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not raw.strip():
            continue
        if "\t" not in raw:
            raise ValueError(f"{args.sentences}:{line_number}: expected 'talk_id<TAB>sentence'")
        talk_id, text = raw.split("\t", 1)
        sentences.append((talk_id, text))
    corpus, log = build_corpus(docs, sentences)
    _write_lines(args.out, (sentence.to_text() for sentence in corpus))
    if args.log:
        _write_lines(
            args.log,
            (
                f"{entry.line_number}\t{entry.talk_id}\t"
                f"{'ok' if entry.aligned else 'failed'}\t{entry.detail}"
                for entry in log
            ),
        )
    aligned = sum(1 for entry in log if entry.aligned)
    print(f"aligned {aligned}/{len(log)} sentences")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    config = _training_config(args, default_epochs=12)
    model = train(_read_corpus(args.corpus), config, _load_profile(args.profile))
    save_model(model, args.out)
    print(f"trained on {args.corpus}, wrote {args.out}")
    return 0


def _cmd_fine_tune(args: argparse.Namespace) -> int:
    config = _training_config(args, default_epochs=6)
    corpus = _read_corpus(args.corpus)
    subset = [sentence for sentence in corpus if sentence.has_eol]
    if len(subset) < len(corpus):
        print(f"using the {len(subset)}/{len(corpus)} sentences containing <eol>", file=sys.stderr)
    model = fine_tune(load_model(args.model), subset, config, _load_profile(args.profile))
    save_model(model, args.out)
    print(f"fine-tuned {args.model}, wrote {args.out}")
    return 0


def _cmd_segment(args: argparse.Namespace) -> int:
    profile = _load_profile(args.profile)
    settings = _settings(args)
    seed = _pick(args.seed, settings, "seed", int, 0)
    beam = _pick(args.beam, settings, "beam_width", int, 4)
    lines = [
        raw for raw in Path(args.infile).read_text(encoding="utf-8").splitlines() if raw.strip()
    ]
    if args.count_char:
        out = [
            segment_count_char(line, profile, seed=seed + i).to_text()
            for i, line in enumerate(lines)
        ]
    else:
        model = load_model(args.model)
        out = [
            segment_learned(model, line, profile, mode=args.mode, beam_width=beam).to_text()
            for line in lines
        ]
    _write_lines(args.out, out)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    profile = _load_profile(args.profile)
    hyp = _read_corpus(args.hyp)
    ref = _read_corpus(args.ref)
    if len(hyp) != len(ref):
        raise ValueError(f"hypothesis has {len(hyp)} sentences, reference {len(ref)}")
    report = evaluate(zip(hyp, ref), profile)
    if args.table:
        print(report.to_table())
    else:
        print(report.to_json())
    if args.json:
        Path(args.json).write_text(report.to_json() + "\n", encoding="utf-8")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    profile = _load_profile(args.profile)
    metadata = None
    if args.metadata:
        metadata = load_segments_metadata(Path(args.metadata).read_text(encoding="utf-8"))
    report = stats(_read_corpus(args.corpus), metadata, profile)
    print(report.to_json() if args.json else report.to_text())
    return 0


def _cmd_reannotate(args: argparse.Namespace) -> int:
    profile = _load_profile(args.profile)
    settings = _settings(args)
    config = PipelineConfig(
        profile=profile,
        training=replace(
            TrainingConfig(), seed=_pick(args.seed, settings, "seed", int, 0)
        ),
        fine_tune_epochs=_pick(args.epochs, settings, "fine_tune_epochs", int, 6),
        iterations=_pick(args.iterations, settings, "iterations", int, 1),
        beam_width=_pick(args.beam, settings, "beam_width", int, 4),
    )
    corpus, model, reports = reannotate(
        _read_corpus(args.corpus), load_model(args.model), profile, config
    )
    _write_lines(args.out, (sentence.to_text() for sentence in corpus))
    if args.model_out:
        save_model(model, args.model_out)
    for report in reports:
        print(
            f"iteration {report.iteration}: selected {report.selected}, "
            f"accepted {report.accepted}, conformity "
            f"{report.conformity_before:.4f} -> {report.conformity_after:.4f}"
        )
    if args.report:
        import json

        Path(args.report).write_text(
            json.dumps([r.to_json_dict() for r in reports], sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subseg",
        description="Subtitle segmentation toolkit: corpus construction, "
        "training, segmentation, evaluation and re-annotation.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--profile", help="constraint profile file (key = value lines)")
    common.add_argument("--config", help="pipeline config file (key = value lines)")

    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("build-corpus", parents=[common], help="align sentences to .srt cues")
    p.add_argument("--srt-dir", required=True, help="directory of .srt files (talk id = stem)")
    p.add_argument("--sentences", required=True, help="TSV file: talk_id<TAB>sentence")
    p.add_argument("--out", required=True, help="annotated corpus output")
    p.add_argument("--log", help="per-sentence alignment log (TSV)")
    p.set_defaults(func=_cmd_build_corpus)

    p = commands.add_parser("train", parents=[common], help="train the gap classifier")
    p.add_argument("--corpus", required=True, help="annotated training corpus")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    p.add_argument("--no-shuffle", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = commands.add_parser("fine-tune", parents=[common], help="fine-tune on <eol> sentences")
    p.add_argument("--model", required=True, help="base model file")
    p.add_argument("--corpus", required=True, help="annotated corpus (only <eol> sentences used)")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    p.add_argument("--no-shuffle", action="store_true")
    p.set_defaults(func=_cmd_fine_tune)

    p = commands.add_parser("segment", parents=[common], help="insert break symbols")
    p.add_argument("--in", dest="infile", required=True, help="input sentences, one per line")
    p.add_argument("--out", required=True, help="annotated output file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="trained model file")
    group.add_argument("--count-char", action="store_true", help="use the character-count baseline")
    p.add_argument("--mode", choices=("full", "eol_only"), default="full")
    p.add_argument("--beam", type=int, default=None, help="beam width (default 4)")
    p.set_defaults(func=_cmd_segment)

    p = commands.add_parser("evaluate", parents=[common], help="score hypotheses against references")
    p.add_argument("--hyp", required=True, help="hypothesis corpus")
    p.add_argument("--ref", required=True, help="reference corpus")
    p.add_argument("--json", help="also write the JSON report to this path")
    p.add_argument("--table", action="store_true", help="print a table instead of JSON")
    p.set_defaults(func=_cmd_evaluate)

    p = commands.add_parser("stats", parents=[common], help="corpus statistics")
    p.add_argument("--corpus", required=True, help="annotated corpus")
    p.add_argument("--metadata", help="duration sidecar aligned 1:1 with the corpus")
    p.add_argument("--json", action="store_true", help="print JSON instead of key/value lines")
    p.set_defaults(func=_cmd_stats)

    p = commands.add_parser("reannotate", parents=[common], help="iterative line-break restoration")
    p.add_argument("--corpus", required=True, help="annotated corpus with <eob> structure")
    p.add_argument("--model", required=True, help="base (non-fine-tuned) model file")
    p.add_argument("--out", required=True, help="re-annotated corpus output")
    p.add_argument("--model-out", dest="model_out", help="write the last fine-tuned model here")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None, help="fine-tune epochs per iteration")
    p.add_argument("--beam", type=int, default=None)
    p.add_argument("--report", help="write per-iteration JSON report here")
    p.set_defaults(func=_cmd_reannotate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _OPERATIONAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
