"""
scudkit - SCUD treebank toolkit

Single entry point for the whole workflow:
1. Validating and measuring SCUD-annotated corpora
2. Comparing two annotation passes
3. Augmenting clean treebanks with ASR-style disfluencies
4. Training, fine-tuning and running the biaffine parser
5. Scoring parser output and keeping a results ledger

Settings resolve as: command-line flag > --config file > environment > default.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from config import config
from treebank import (
    load_tagset, read_conllu, read_corpora, render_svg, render_text, save_conllu,
    split_corpus, synthesize_treebank, write_conllu,
)
from treebank.fetcher import CorpusFetcher
from validator import RULES, RuleConfig, validate_corpus
from analysis import (
    attachment_agreement, compare_distributions, length_histogram, relation_frequencies,
    tagset_coverage, uas_las,
)
from analysis.evaluation import format_confusion, format_relations, format_summary
from analysis.stats import format_comparison, format_frequencies, format_lengths
from augment import AugmentConfig, augment_with_counts
from biaffine import (
    ParserConfig, finetune, load_checkpoint, load_embeddings, parse, save_checkpoint,
    train, write_training_log,
)
from ledger import add_result, get_results_table

log = logging.getLogger("scudkit")

FORMATS = ("text", "tsv", "json")


class Settings:
    """Shared settings for one invocation, resolved once from flags, file and environment."""

    def __init__(self, args: argparse.Namespace, file_values: dict[str, str] | None = None):
        values = file_values or {}
        self.tagset_path = config.resolve("tagset", args.tagset, values, config.TAGSET_PATH)
        self.seed = config.resolve("seed", args.seed, values, config.SEED, int)
        self.jobs = config.resolve("jobs", args.jobs, values, config.JOBS, int)
        self.fmt = config.resolve("format", args.format, values, "text")
        if self.fmt not in FORMATS:
            raise ValueError(f"format must be one of {', '.join(FORMATS)}, got {self.fmt!r}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")

    def tagset(self) -> tuple[str, ...]:
        return load_tagset(self.tagset_path)


def _status(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(text: str) -> None:
    sys.stdout.write(text)


def _dump(payload) -> None:
    _emit(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


# --- corpus commands ------------------------------------------------------

def cmd_validate(args, settings: Settings) -> int:
    disabled = [r.strip().upper() for r in (args.disable or "").split(",") if r.strip()]
    rules = RuleConfig.without(*disabled)
    corpus = read_corpora(args.files)
    report = validate_corpus(corpus, settings.tagset(), rules, jobs=settings.jobs)
    _emit(report.to_json() if settings.fmt == "json" else report.to_text())
    if report.errors:
        _status(f"❌ {len(report.errors)} error(s), {len(report.warnings)} warning(s) in {len(corpus)} sentences")
        return 1 if args.strict else 0
    _status(f"✅ {len(corpus)} sentences, no errors ({len(report.warnings)} warning(s))")
    return 0


def cmd_stats(args, settings: Settings) -> int:
    corpus = read_corpora(args.files)
    rows = relation_frequencies(corpus, jobs=settings.jobs)
    coverage = tagset_coverage(corpus, settings.tagset()) if args.coverage else None
    lengths = length_histogram(corpus) if args.lengths else None

    if settings.fmt == "json":
        payload = {"relations": [
            {"relation": r.relation, "count": r.count, "percentage": r.percentage} for r in rows
        ]}
        if coverage is not None:
            payload["coverage"] = {"used": sorted(coverage.used), "unused": sorted(coverage.unused)}
        if lengths is not None:
            payload["lengths"] = {
                "histogram": {str(k): v for k, v in lengths.histogram.items()},
                "mean": lengths.mean,
                "median": lengths.median,
            }
        _dump(payload)
        return 0

    _emit(format_frequencies(rows, settings.fmt))
    if coverage is not None:
        _emit(f"\nused: {' '.join(sorted(coverage.used))}\nunused: {' '.join(sorted(coverage.unused))}\n")
    if lengths is not None:
        _emit("\n" + format_lengths(lengths, settings.fmt))
    return 0


def cmd_compare(args, settings: Settings) -> int:
    corpus_a, corpus_b = read_conllu(args.a), read_conllu(args.b)
    rows = compare_distributions(corpus_a, corpus_b, top_k=args.top_k, jobs=settings.jobs)
    names = (args.names[0], args.names[1]) if args.names else (Path(args.a).stem, Path(args.b).stem)
    if settings.fmt == "json":
        def cell(r):
            return None if r is None else {"relation": r.relation, "percentage": r.percentage}
        _dump([{names[0]: cell(a), names[1]: cell(b)} for a, b in rows])
    else:
        _emit(format_comparison(rows, names, settings.fmt))
    return 0


def cmd_agree(args, settings: Settings) -> int:
    result = attachment_agreement(
        read_conllu(args.a), read_conllu(args.b), surface_only=args.surface_only, jobs=settings.jobs
    )
    if settings.fmt == "json":
        _dump({
            "tokens": result.token_count,
            "unlabeled": result.unlabeled_pct,
            "labeled": result.labeled_pct,
        })
    elif settings.fmt == "tsv" or args.per_sentence:
        _emit(result.to_tsv())
    else:
        _emit(f"{result.unlabeled_pct:.1f} {result.labeled_pct:.1f}\n")
    return 0


def cmd_augment(args, settings: Settings) -> int:
    if args.config:
        aug = AugmentConfig.from_file(args.config, seed=args.seed, default_seed=settings.seed)
    else:
        aug = AugmentConfig(seed=settings.seed)
    corpus = read_conllu(args.input)
    augmented, counts = augment_with_counts(corpus, aug, jobs=settings.jobs)
    save_conllu(augmented, args.output)
    applied = ", ".join(f"{name} {counts[name]}" for name in sorted(counts)) or "nothing"
    _status(f"✅ augmented {len(corpus)} sentences (seed {aug.seed}; {applied}) -> {args.output}")
    return 0


def cmd_synth(args, settings: Settings) -> int:
    corpus = synthesize_treebank(args.count, seed=settings.seed, prefix=args.prefix)
    save_conllu(corpus, args.output)
    _status(f"✅ wrote {len(corpus)} synthetic sentences -> {args.output}")
    return 0


def cmd_split(args, settings: Settings) -> int:
    corpus = read_conllu(args.input)
    train_part, test_part = split_corpus(corpus, args.test_size, seed=settings.seed)
    save_conllu(train_part, args.train)
    save_conllu(test_part, args.test)
    _status(f"✅ {len(train_part)} sentences -> {args.train}, {len(test_part)} -> {args.test}")
    return 0


def cmd_render(args, settings: Settings) -> int:
    corpus = read_conllu(args.input)
    if args.sent_id:
        matches = [s for s in corpus if s.sent_id == args.sent_id]
        if not matches:
            raise ValueError(f"no sentence with sent_id {args.sent_id!r} in {args.input}")
        sentence = matches[0]
    else:
        if not 1 <= args.index <= len(corpus):
            raise ValueError(f"sentence index {args.index} out of range 1..{len(corpus)}")
        sentence = corpus[args.index - 1]

    drawing = render_svg(sentence) if args.svg else render_text(sentence)
    if args.out:
        Path(args.out).write_text(drawing, encoding="utf-8")
        _status(f"✅ wrote {args.out}")
    else:
        _emit(drawing)
    return 0


def cmd_fetch(args, settings: Settings) -> int:
    url = args.url or config.CORPUS_URL
    if not url:
        raise ValueError("no URL given and SCUDKIT_CORPUS_URL is not set")
    fetcher = CorpusFetcher()
    if args.raw:
        path = fetcher.download(url, args.out, force=args.force)
        _status(f"✅ {url} -> {path}")
    else:
        corpus = fetcher.fetch_corpus(url, args.out, force=args.force)
        _status(f"✅ {url}: {len(corpus)} sentences")
    return 0


# --- parser commands ------------------------------------------------------

def _parser_config(args, base: ParserConfig | None = None) -> ParserConfig:
    overrides = {"seed": args.seed, "max_epochs": args.epochs, "patience": args.patience}
    if args.config:
        return ParserConfig.from_file(args.config, fallback={"seed": config.SEED}, **overrides)
    return (base or ParserConfig(seed=config.SEED)).with_overrides(**overrides)


def _report_training(result, args) -> None:
    save_checkpoint(result.model, args.out)
    if args.log:
        write_training_log(result.log, args.log)
    _status(
        f"✅ best epoch {result.best_epoch}: dev UAS {result.final.uas:.2f} LAS {result.final.las:.2f}"
        f" -> {args.out}"
    )


def cmd_train(args, settings: Settings) -> int:
    parser_config = _parser_config(args)
    train_corpus = read_corpora(args.train)
    dev_corpus = read_conllu(args.dev)
    embeddings = load_embeddings(args.embeddings, parser_config.embed_dim) if args.embeddings else None
    result = train(train_corpus, dev_corpus, embeddings, parser_config, tagset=settings.tagset())
    _report_training(result, args)
    return 0


def cmd_finetune(args, settings: Settings) -> int:
    model = load_checkpoint(args.checkpoint)
    parser_config = _parser_config(args, base=model.config)
    if args.epsilon is not None:
        parser_config = parser_config.with_overrides(finetune_epsilon=args.epsilon)
    result = finetune(model, read_corpora(args.train), read_conllu(args.dev), parser_config)
    _status(f"   dev LAS before fine-tuning: {result.initial.las:.2f}")
    _report_training(result, args)
    return 0


def cmd_parse(args, settings: Settings) -> int:
    model = load_checkpoint(args.checkpoint)
    parsed = parse(model, read_conllu(args.input))
    if args.output:
        save_conllu(parsed, args.output)
        _status(f"✅ parsed {len(parsed)} sentences -> {args.output}")
    else:
        _emit(write_conllu(parsed))
    return 0


def cmd_eval(args, settings: Settings) -> int:
    gold, pred = read_conllu(args.gold), read_conllu(args.predicted)
    options = {"include_empty": args.include_empty, "exclude_punct": args.exclude_punct}
    result = uas_las(gold, pred, jobs=settings.jobs, **options)

    if args.record:
        add_result(args.record, result.uas, result.las, result.token_count,
                   gold=str(args.gold), predicted=str(args.predicted))
        _status(f"✅ recorded {args.record}")

    if args.relation:
        row = result.report.row(args.relation)
        if settings.fmt == "json":
            _dump({"relation": row.relation, "gold": row.gold, "predicted": row.predicted, "correct": row.correct})
        else:
            _emit(f"{row.relation}\tgold {row.gold}\tpredicted {row.predicted}\tcorrect {row.correct}\n")
        return 0

    if settings.fmt == "json":
        _dump({
            "tokens": result.token_count,
            "uas": result.uas,
            "las": result.las,
            "relations": [
                {"relation": r.relation, "gold": r.gold, "predicted": r.predicted, "correct": r.correct}
                for r in result.report.rows
            ],
        })
        return 0
    _emit(format_summary(result))
    if args.relations:
        _emit("\n" + format_relations(result.report, settings.fmt))
    if args.confusion:
        _emit("\n" + format_confusion(result.report))
    return 0


def cmd_results(args, settings: Settings) -> int:
    _emit(get_results_table(args.ledger, settings.fmt))
    return 0


# --- argument parsing -----------------------------------------------------

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tagset", help=f"Relation tagset file (default: $SCUDKIT_TAGSET or {config.TAGSET_PATH})")
    common.add_argument("--format", choices=FORMATS, help="Output format (default: text)")
    common.add_argument("--jobs", type=int, help=f"Worker processes for per-sentence work (default: {config.JOBS})")
    common.add_argument("--seed", type=int, help=f"Random seed (default: {config.SEED})")
    common.add_argument(
        "--config",
        help="key = value settings file; flags override it. For augment, train and finetune it is "
             "the augmentation or parser config; otherwise it may set tagset, format, jobs and seed",
    )
    common.add_argument("--verbose", "-v", action="count", default=0, help="Log progress (-vv for debug)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scudkit",
        description="SCUD treebank toolkit: validate, measure, augment, parse and score spoken-language treebanks",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = [_common_options()]

    p = sub.add_parser("validate", parents=common, help="Check CoNLL-U files against the SCUD rules")
    p.add_argument("files", nargs="+", help="CoNLL-U files")
    p.add_argument("--strict", action="store_true", help="Exit 1 when any error-severity violation is found")
    p.add_argument("--disable", help=f"Comma-separated rules to skip ({', '.join(RULES)})")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", parents=common, help="Relation frequency distribution of a corpus")
    p.add_argument("files", nargs="+", help="CoNLL-U files, counted together")
    p.add_argument("--coverage", action="store_true", help="Also list used and unused tagset relations")
    p.add_argument("--lengths", action="store_true", help="Also show the sentence length histogram")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("compare", parents=common, help="Top relation frequencies of two corpora side by side")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--top-k", type=int, default=10, help="Rows per corpus (default: 10)")
    p.add_argument("--names", nargs=2, metavar=("NAME_A", "NAME_B"), help="Column titles (default: file names)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("agree", parents=common, help="Attachment agreement between two annotations")
    p.add_argument("a", help="First annotation pass")
    p.add_argument("b", help="Second annotation pass")
    p.add_argument("--surface-only", action="store_true", help="Leave empty nodes out")
    p.add_argument("--per-sentence", action="store_true", help="Print the per-sentence TSV breakdown")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("augment", parents=common, help="Add ASR-style noise to a clean treebank")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("synth", parents=common, help="Write a synthetic clean treebank")
    p.add_argument("count", type=int)
    p.add_argument("output")
    p.add_argument("--prefix", default="synth", help="sent_id prefix (default: synth)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", parents=common, help="Hold out a seeded test portion of a corpus")
    p.add_argument("input")
    p.add_argument("train")
    p.add_argument("test")
    p.add_argument("--test-size", type=int, required=True, help="Sentences to hold out")
    p.set_defaults(func=cmd_split)

    for name, help_text in (("train", "Train a parser from scratch"), ("finetune", "Continue training a checkpoint")):
        p = sub.add_parser(name, parents=common, help=help_text)
        if name == "finetune":
            p.add_argument("checkpoint", help="Checkpoint to start from")
            p.add_argument("--epsilon", type=float, help="Relative dev-loss change that stops fine-tuning")
        p.add_argument("train", nargs="+", help="Training CoNLL-U files, concatenated in order")
        p.add_argument("--dev", required=True, help="Dev CoNLL-U file for model selection")
        p.add_argument("--out", required=True, help="Checkpoint to write")
        p.add_argument("--log", help="Write the per-epoch TSV training log here")
        p.add_argument("--epochs", type=int, help="Maximum epochs")
        p.add_argument("--patience", type=int, help="Epochs without dev LAS improvement before stopping")
        if name == "train":
            p.add_argument("--embeddings", help="Pretrained word vectors (text format)")
        p.set_defaults(func=cmd_train if name == "train" else cmd_finetune)

    p = sub.add_parser("parse", parents=common, help="Parse sentences with a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("input")
    p.add_argument("output", nargs="?", help="Output CoNLL-U (default: stdout)")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", parents=common, help="UAS/LAS of predicted trees against gold")
    p.add_argument("gold")
    p.add_argument("predicted")
    p.add_argument("--include-empty", action="store_true", help="Also score empty nodes")
    p.add_argument("--exclude-punct", action="store_true", help="Skip gold punct tokens")
    p.add_argument("--relations", action="store_true", help="Add the per-relation precision/recall table")
    p.add_argument("--confusion", action="store_true", help="Add the gold/predicted label confusion counts")
    p.add_argument("--relation", help="Only print gold/predicted/correct counts for this relation")
    p.add_argument("--record", metavar="NAME", help="Store the scores in the results ledger under NAME")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", parents=common, help="Draw one sentence as a text tree or SVG")
    p.add_argument("input")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--sent-id", help="Sentence to draw")
    which.add_argument("--index", type=int, default=1, help="1-based sentence position (default: 1)")
    p.add_argument("--svg", action="store_true", help="SVG instead of a text tree")
    p.add_argument("--out", help="Write the drawing to a file")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("fetch", parents=common, help="Download a released corpus into the cache")
    p.add_argument("url", nargs="?", help="File URL (default: $SCUDKIT_CORPUS_URL)")
    p.add_argument("--out", help="Destination path (default: cache directory)")
    p.add_argument("--force", action="store_true", help="Download even when cached")
    p.add_argument("--raw", action="store_true", help="Do not parse the download as CoNLL-U (e.g. embeddings)")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("results", parents=common, help="Show the recorded evaluation results")
    p.add_argument("--ledger", help=f"Ledger file (default: {config.LEDGER_PATH})")
    p.set_defaults(func=cmd_results)

    return parser


def _setup_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, config.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")


# commands whose --config is their own settings file
OWN_CONFIG = {"augment", "train", "finetune"}


def main(argv: list[str] | None = None) -> int:
    """Main entry point with CLI argument parsing."""
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)

    try:
        file_values = {} if args.command in OWN_CONFIG else config.read_file(args.config)
        settings = Settings(args, file_values)
        return args.func(args, settings)
    except (ValueError, OSError) as e:
        _status(f"❌ {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
