"""
Attachment Score Evaluation

UAS/LAS of a predicted corpus against gold, with per-relation precision,
recall and F1 and a relation confusion table.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

from treebank.corpus import map_sentences
from treebank.model import AnnotatedSentence

from .alignment import AlignmentError, align_sentence

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RelationScore:
    relation: str
    gold: int
    predicted: int
    correct: int  # right head and right label

    @property
    def precision(self) -> float:
        return self.correct / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return self.correct / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class RelationReport:
    rows: tuple[RelationScore, ...]
    confusion: dict[tuple[str, str], int]  # (gold, predicted) over correctly headed tokens

    def row(self, relation: str) -> RelationScore:
        for row in self.rows:
            if row.relation == relation:
                return row
        return RelationScore(relation, 0, 0, 0)


@dataclass(frozen=True)
class EvalResult:
    token_count: int
    head_correct: int
    label_correct: int
    report: RelationReport = field(default_factory=lambda: RelationReport((), {}))

    @property
    def uas(self) -> float:
        return 100.0 * self.head_correct / self.token_count if self.token_count else 100.0

    @property
    def las(self) -> float:
        return 100.0 * self.label_correct / self.token_count if self.token_count else 100.0


@dataclass
class _Tally:
    tokens: int = 0
    heads: int = 0
    labels: int = 0
    gold: Counter = field(default_factory=Counter)
    predicted: Counter = field(default_factory=Counter)
    correct: Counter = field(default_factory=Counter)
    confusion: Counter = field(default_factory=Counter)

    def merge(self, other: "_Tally") -> "_Tally":
        self.tokens += other.tokens
        self.heads += other.heads
        self.labels += other.labels
        self.gold.update(other.gold)
        self.predicted.update(other.predicted)
        self.correct.update(other.correct)
        self.confusion.update(other.confusion)
        return self


def _score_sentence(item, include_empty: bool, exclude_punct: bool) -> _Tally:
    index, gold, pred = item
    tally = _Tally()
    for g, p in align_sentence(gold, pred, index, include_empty):
        if not g.is_attached:
            raise AlignmentError("token is unattached in the gold corpus", index, g.id)
        if not p.is_attached:
            raise AlignmentError("token is unattached in the predicted corpus", index, p.id)
        if exclude_punct and g.primary == "punct":
            continue
        tally.tokens += 1
        tally.gold[g.primary] += 1
        tally.predicted[p.primary] += 1
        if g.head == p.head:
            tally.heads += 1
            tally.confusion[(g.primary, p.primary)] += 1
            if g.primary == p.primary:
                tally.labels += 1
                tally.correct[g.primary] += 1
    return tally


def _evaluate(gold, pred, include_empty, exclude_punct, jobs) -> _Tally:
    if len(gold) != len(pred):
        raise AlignmentError(f"sentence count differs: {len(gold)} vs {len(pred)}")
    items = [(i, g, p) for i, (g, p) in enumerate(zip(gold, pred), start=1)]
    score = partial(_score_sentence, include_empty=include_empty, exclude_punct=exclude_punct)
    total = _Tally()
    for tally in map_sentences(score, items, jobs):
        total.merge(tally)
    return total


def _report(tally: _Tally) -> RelationReport:
    relations = sorted(set(tally.gold) | set(tally.predicted))
    rows = tuple(
        RelationScore(rel, tally.gold[rel], tally.predicted[rel], tally.correct[rel])
        for rel in relations
    )
    return RelationReport(rows, dict(sorted(tally.confusion.items())))


def uas_las(
    gold: Sequence[AnnotatedSentence],
    pred: Sequence[AnnotatedSentence],
    include_empty: bool = False,
    exclude_punct: bool = False,
    jobs: int = 1,
) -> EvalResult:
    """
    Attachment scores over surface tokens; labels compared on primary names.

    Args:
        gold: Reference corpus
        pred: Parser output over the same tokens
        include_empty: Also score empty nodes
        exclude_punct: Skip tokens whose gold relation is punct
        jobs: Worker processes

    Returns:
        UAS/LAS together with the per-relation report
    """
    tally = _evaluate(gold, pred, include_empty, exclude_punct, jobs)
    result = EvalResult(tally.tokens, tally.heads, tally.labels, _report(tally))
    log.info("evaluated %d tokens: UAS %.2f LAS %.2f", result.token_count, result.uas, result.las)
    return result


def relation_report(
    gold: Sequence[AnnotatedSentence],
    pred: Sequence[AnnotatedSentence],
    include_empty: bool = False,
    exclude_punct: bool = False,
) -> RelationReport:
    """Per-relation gold/predicted/correct counts and the confusion table."""
    return _report(_evaluate(gold, pred, include_empty, exclude_punct, jobs=1))


# --- formatting ---------------------------------------------------------

def format_summary(result: EvalResult) -> str:
    return f"{result.uas:.2f} {result.las:.2f}\n"


def format_relations(report: RelationReport, fmt: str = "text") -> str:
    if fmt == "tsv":
        lines = ["relation\tgold\tpredicted\tcorrect\tprecision\trecall\tf1"]
        lines += [
            f"{r.relation}\t{r.gold}\t{r.predicted}\t{r.correct}\t{r.precision:.4f}\t{r.recall:.4f}\t{r.f1:.4f}"
            for r in report.rows
        ]
        return "\n".join(lines) + "\n"
    lines = [f"{'relation':<12}{'gold':>7}{'pred':>7}{'correct':>9}{'P':>8}{'R':>8}{'F1':>8}"]
    lines += [
        f"{r.relation:<12}{r.gold:>7}{r.predicted:>7}{r.correct:>9}"
        f"{100 * r.precision:>8.2f}{100 * r.recall:>8.2f}{100 * r.f1:>8.2f}"
        for r in report.rows
    ]
    return "\n".join(lines) + "\n"


def format_confusion(report: RelationReport) -> str:
    lines = ["gold\tpredicted\tcount"]
    lines += [f"{g}\t{p}\t{n}" for (g, p), n in report.confusion.items()]
    return "\n".join(lines) + "\n"
