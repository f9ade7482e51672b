"""
Inter-annotator agreement as the share of dependencies left unchanged
between an annotation pass and its correction.
"""
import logging
from dataclasses import dataclass
from typing import Sequence

from treebank.corpus import map_sentences
from treebank.model import AnnotatedSentence

from .alignment import AlignmentError, align_sentence

log = logging.getLogger(__name__)


def _pct(part: int, whole: int) -> float:
    return 100.0 * part / whole if whole else 100.0


@dataclass(frozen=True)
class SentenceAgreement:
    sent_id: str
    token_count: int
    unlabeled: int
    labeled: int

    @property
    def unlabeled_pct(self) -> float:
        return _pct(self.unlabeled, self.token_count)

    @property
    def labeled_pct(self) -> float:
        return _pct(self.labeled, self.token_count)


@dataclass(frozen=True)
class AgreementResult:
    token_count: int
    unlabeled_matches: int
    labeled_matches: int
    sentences: tuple[SentenceAgreement, ...] = ()

    @property
    def unlabeled_pct(self) -> float:
        return _pct(self.unlabeled_matches, self.token_count)

    @property
    def labeled_pct(self) -> float:
        return _pct(self.labeled_matches, self.token_count)

    def to_tsv(self) -> str:
        """Per-sentence breakdown."""
        lines = ["sent_id\ttokens\tunlabeled\tlabeled"]
        for s in self.sentences:
            lines.append(f"{s.sent_id}\t{s.token_count}\t{s.unlabeled_pct:.1f}\t{s.labeled_pct:.1f}")
        return "\n".join(lines) + "\n"


def _sentence_agreement(item) -> SentenceAgreement:
    index, sent_a, sent_b, surface_only = item
    n = u = l = 0
    for tok_a, tok_b in align_sentence(sent_a, sent_b, index, include_empty=not surface_only):
        if not (tok_a.is_attached or tok_b.is_attached):
            continue
        n += 1
        if tok_a.is_attached and tok_a.head == tok_b.head:
            u += 1
            if tok_a.primary == tok_b.primary:
                l += 1
    return SentenceAgreement(sent_a.sent_id or f"#{index}", n, u, l)


def attachment_agreement(
    corpus_a: Sequence[AnnotatedSentence],
    corpus_b: Sequence[AnnotatedSentence],
    surface_only: bool = False,
    jobs: int = 1,
) -> AgreementResult:
    """
    Compare two annotations of the same tokens.

    A token counts when it is attached in at least one corpus. Unlabeled
    agreement needs the same head; labeled agreement also needs the same
    primary relation (subtypes ignored).

    Args:
        corpus_a: First annotation pass
        corpus_b: Second (corrected) pass
        surface_only: Leave empty nodes out of the comparison
        jobs: Worker processes

    Returns:
        Overall and per-sentence agreement
    """
    if len(corpus_a) != len(corpus_b):
        raise AlignmentError(f"sentence count differs: {len(corpus_a)} vs {len(corpus_b)}")
    items = [(i, a, b, surface_only) for i, (a, b) in enumerate(zip(corpus_a, corpus_b), start=1)]
    per_sentence = map_sentences(_sentence_agreement, items, jobs)

    total = sum(s.token_count for s in per_sentence)
    unlabeled = sum(s.unlabeled for s in per_sentence)
    labeled = sum(s.labeled for s in per_sentence)
    log.info("agreement over %d tokens: %d unlabeled, %d labeled matches", total, unlabeled, labeled)
    return AgreementResult(total, unlabeled, labeled, tuple(per_sentence))
