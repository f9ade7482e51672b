"""Corpus statistics, inter-annotator agreement and parser evaluation."""
from .alignment import AlignmentError
from .agreement import AgreementResult, attachment_agreement
from .evaluation import EvalResult, RelationReport, RelationScore, relation_report, uas_las
from .stats import (
    LengthStats, RelationFrequency, TagsetCoverage, compare_distributions,
    length_histogram, relation_frequencies, tagset_coverage,
)

__all__ = [
    "AlignmentError", "AgreementResult", "attachment_agreement",
    "EvalResult", "RelationReport", "RelationScore", "relation_report", "uas_las",
    "LengthStats", "RelationFrequency", "TagsetCoverage", "compare_distributions",
    "length_histogram", "relation_frequencies", "tagset_coverage",
]
