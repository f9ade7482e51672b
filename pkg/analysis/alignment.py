"""
Token alignment between two annotations of the same text.

Both agreement and evaluation compare corpora token by token; they require
identical tokenization and fail loudly at the first divergence.
"""
from typing import Iterator, Sequence

from treebank.model import AnnotatedSentence, DepToken


class AlignmentError(ValueError):
    """The two corpora do not cover the same tokens."""

    def __init__(self, message: str, sentence_index: int | None = None, node=None):
        self.sentence_index = sentence_index
        self.node = node
        where = []
        if sentence_index is not None:
            where.append(f"sentence {sentence_index}")
        if node is not None:
            where.append(f"token {node}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def align_sentence(
    a: AnnotatedSentence,
    b: AnnotatedSentence,
    index: int,
    include_empty: bool = True,
) -> list[tuple[DepToken, DepToken]]:
    """Pair up tokens of two annotations of one utterance (index is 1-based, for messages)."""
    surface_a, surface_b = a.surface_tokens, b.surface_tokens
    for tok_a, tok_b in zip(surface_a, surface_b):
        if tok_a.form != tok_b.form:
            raise AlignmentError(f"form {tok_a.form!r} != {tok_b.form!r}", index, tok_a.id)
    if len(surface_a) != len(surface_b):
        shorter = min(len(surface_a), len(surface_b))
        raise AlignmentError(f"{len(surface_a)} vs {len(surface_b)} surface tokens", index, shorter + 1)

    pairs = list(zip(surface_a, surface_b))
    if include_empty:
        empty_a = {tok.id: tok for tok in a.empty_nodes}
        empty_b = {tok.id: tok for tok in b.empty_nodes}
        if empty_a.keys() != empty_b.keys():
            node = min(empty_a.keys() ^ empty_b.keys())
            raise AlignmentError("empty node present in only one corpus", index, node)
        pairs.extend((empty_a[node], empty_b[node]) for node in sorted(empty_a))
    return pairs


def align_corpora(
    a: Sequence[AnnotatedSentence],
    b: Sequence[AnnotatedSentence],
    include_empty: bool = True,
) -> Iterator[tuple[int, AnnotatedSentence, list[tuple[DepToken, DepToken]]]]:
    """
    Yield (1-based sentence index, sentence from `a`, token pairs) per sentence.

    Raises AlignmentError on a sentence count mismatch or at the first token
    that differs.
    """
    if len(a) != len(b):
        raise AlignmentError(f"sentence count differs: {len(a)} vs {len(b)}")
    for index, (sent_a, sent_b) in enumerate(zip(a, b), start=1):
        yield index, sent_a, align_sentence(sent_a, sent_b, index, include_empty)
