"""
Corpus Statistics

Relation frequency distributions, tagset coverage and sentence lengths, plus
the side-by-side corpus comparison table.
"""
import statistics
from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from treebank.corpus import map_sentences
from treebank.model import AnnotatedSentence


def round_half_away(value: float, places: int = 1) -> float:
    """Round half away from zero (12.25 -> 12.3), unlike round()'s banker's rounding."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class RelationFrequency:
    relation: str
    count: int
    percentage: float  # exact; use `rounded` for display

    @property
    def rounded(self) -> float:
        return round_half_away(self.percentage, 1)


@dataclass(frozen=True)
class TagsetCoverage:
    used: frozenset[str]
    unused: frozenset[str]
    unknown: frozenset[str]  # observed but outside the tagset


@dataclass(frozen=True)
class LengthStats:
    histogram: dict[int, int]
    mean: float
    median: float


def _relation_counts(sentence: AnnotatedSentence) -> Counter:
    return Counter(tok.primary for tok in sentence.tokens if tok.is_attached)


def count_relations(corpus: Sequence[AnnotatedSentence], jobs: int = 1) -> Counter:
    """Primary relation counts over attached tokens (surface and empty)."""
    total = Counter()
    for counts in map_sentences(_relation_counts, list(corpus), jobs):
        total.update(counts)
    return total


def relation_frequencies(corpus: Sequence[AnnotatedSentence], jobs: int = 1) -> list[RelationFrequency]:
    """
    Relation distribution, most frequent first (ties broken by name).

    Raises ValueError when no token in the corpus is attached.
    """
    counts = count_relations(corpus, jobs)
    total = sum(counts.values())
    if not total:
        raise ValueError("no attached tokens")
    return [
        RelationFrequency(relation, count, 100.0 * count / total)
        for relation, count in sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    ]


def tagset_coverage(corpus: Sequence[AnnotatedSentence], tagset: Iterable[str]) -> TagsetCoverage:
    tagset = frozenset(tagset)
    observed = frozenset(count_relations(corpus))
    return TagsetCoverage(used=observed & tagset, unused=tagset - observed, unknown=observed - tagset)


def length_histogram(corpus: Sequence[AnnotatedSentence]) -> LengthStats:
    """Sentence lengths in surface tokens (empty nodes excluded)."""
    lengths = [len(sentence.surface_tokens) for sentence in corpus]
    if not lengths:
        return LengthStats({}, 0.0, 0.0)
    histogram = dict(sorted(Counter(lengths).items()))
    return LengthStats(histogram, float(statistics.mean(lengths)), float(statistics.median(lengths)))


def compare_distributions(
    corpus_a: Sequence[AnnotatedSentence],
    corpus_b: Sequence[AnnotatedSentence],
    top_k: int = 10,
    jobs: int = 1,
) -> list[tuple[RelationFrequency | None, RelationFrequency | None]]:
    """Top-k rows of each corpus side by side; the shorter column is padded with None."""
    if top_k < 1:
        raise ValueError("top_k must be positive")
    left = relation_frequencies(corpus_a, jobs)[:top_k]
    right = relation_frequencies(corpus_b, jobs)[:top_k]
    rows = max(len(left), len(right))
    left += [None] * (rows - len(left))
    right += [None] * (rows - len(right))
    return list(zip(left, right))


# --- formatting ---------------------------------------------------------

def format_frequencies(rows: Sequence[RelationFrequency], fmt: str = "text") -> str:
    if fmt == "tsv":
        lines = ["relation\tcount\tpercentage"]
        lines += [f"{r.relation}\t{r.count}\t{r.rounded:.1f}" for r in rows]
        return "\n".join(lines) + "\n"
    width = max([len(r.relation) for r in rows] + [8])
    lines = [f"{'Tag':<{width}}  {'Count':>7}  {'Freq.':>6}"]
    lines += [f"{r.relation:<{width}}  {r.count:>7}  {r.rounded:>5.1f}%" for r in rows]
    return "\n".join(lines) + "\n"


def format_comparison(
    rows: Sequence[tuple[RelationFrequency | None, RelationFrequency | None]],
    names: tuple[str, str] = ("A", "B"),
    fmt: str = "text",
) -> str:
    def cell(r):
        return ("", "") if r is None else (r.relation, f"{r.rounded:.1f}%")

    if fmt == "tsv":
        lines = [f"{names[0]}_tag\t{names[0]}_freq\t{names[1]}_tag\t{names[1]}_freq"]
        lines += ["\t".join(cell(a) + cell(b)) for a, b in rows]
        return "\n".join(lines) + "\n"

    lines = [f"{names[0]:<20}  {names[1]:<20}", f"{'Tag':<12}{'Freq.':>8}  {'Tag':<12}{'Freq.':>8}"]
    for a, b in rows:
        (ta, fa), (tb, fb) = cell(a), cell(b)
        lines.append(f"{ta:<12}{fa:>8}  {tb:<12}{fb:>8}")
    return "\n".join(lines) + "\n"


def format_lengths(stats: LengthStats, fmt: str = "text") -> str:
    if fmt == "tsv":
        lines = ["length\tsentences"] + [f"{k}\t{v}" for k, v in stats.histogram.items()]
        return "\n".join(lines) + "\n"
    lines = [f"mean length: {stats.mean:.2f}", f"median length: {stats.median:g}"]
    lines += [f"{k:>4}  {v}" for k, v in stats.histogram.items()]
    return "\n".join(lines) + "\n"
