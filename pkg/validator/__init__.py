"""SCUD corpus validation."""
from .rules import RULES, ERROR, WARNING, RuleConfig, ValidationReport, Violation, validate_corpus, validate_sentence

__all__ = ["RULES", "ERROR", "WARNING", "RuleConfig", "ValidationReport", "Violation",
           "validate_corpus", "validate_sentence"]
