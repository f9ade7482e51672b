"""
SCUD Validation Rules

Structural checks (R1-R4, errors) and SCUD annotation conventions (R5-R8,
warnings) over AnnotatedSentence graphs. Problems are report entries, never
exceptions.
"""
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Sequence

from treebank.corpus import map_sentences
from treebank.model import AnnotatedSentence, DepToken, NodeId, ROOT

log = logging.getLogger(__name__)

ERROR = "error"
WARNING = "warning"

RULES = {
    "R1": (ERROR, "exactly one ROOT-headed token, labelled root"),
    "R2": (ERROR, "basic tree is acyclic and connected"),
    "R3": (ERROR, "relation names belong to the tagset"),
    "R4": (ERROR, "flat and goeswith dependents follow their head"),
    "R5": (WARNING, "goeswith joins adjacent surface tokens"),
    "R6": (WARNING, "reparandum precedes its repair"),
    "R7": (WARNING, "preterm only on the final span of the utterance"),
    "R8": (WARNING, "no punct tokens in speech transcripts"),
}


@dataclass(frozen=True)
class Violation:
    sent_id: str
    node: NodeId | None
    rule: str
    severity: str
    message: str

    def sort_key(self):
        return (self.sent_id, self.rule, self.node or NodeId(-1, -1), self.message)

    def to_line(self) -> str:
        node = "_" if self.node is None else str(self.node)
        return f"{self.sent_id}\t{node}\t{self.rule}\t{self.severity}\t{self.message}"

    def to_dict(self) -> dict:
        return {
            "sent_id": self.sent_id,
            "node": None if self.node is None else str(self.node),
            "rule": self.rule,
            "severity": self.severity,
            "message": self.message,
        }


@dataclass(frozen=True)
class RuleConfig:
    """Which rules run. R6 in particular can be switched off."""
    enabled: frozenset[str] = field(default_factory=lambda: frozenset(RULES))

    @classmethod
    def without(cls, *rules: str) -> "RuleConfig":
        unknown = set(rules) - set(RULES)
        if unknown:
            raise ValueError(f"unknown rule codes: {', '.join(sorted(unknown))}")
        return cls(frozenset(RULES) - set(rules))

    def on(self, rule: str) -> bool:
        return rule in self.enabled


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def counts(self) -> dict[str, int]:
        counts = Counter(v.rule for v in self.violations)
        return {rule: counts[rule] for rule in sorted(counts)}

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == ERROR]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == WARNING]

    @property
    def passed(self) -> bool:
        return not self.violations

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(tuple(sorted(self.violations + other.violations, key=Violation.sort_key)))

    def to_text(self) -> str:
        """Line-oriented report followed by a summary block."""
        lines = [v.to_line() for v in self.violations]
        lines.append("")
        lines.append(f"# errors: {len(self.errors)}")
        lines.append(f"# warnings: {len(self.warnings)}")
        for rule, count in self.counts.items():
            lines.append(f"# {rule}: {count}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "violations": [v.to_dict() for v in self.violations],
            "counts": self.counts,
            "errors": len(self.errors),
            "warnings": len(self.warnings),
        }, indent=2, ensure_ascii=False) + "\n"


def _descendants(sentence: AnnotatedSentence, node: NodeId) -> set[NodeId]:
    found = {node}
    frontier = [node]
    while frontier:
        current = frontier.pop()
        for child in sentence.dependents(current):
            if child.id not in found:
                found.add(child.id)
                frontier.append(child.id)
    return found


def _check_root(sentence: AnnotatedSentence, add) -> None:
    roots = sentence.root_tokens()
    unattached = any(not tok.is_attached for tok in sentence.tokens)
    if not roots:
        if not (sentence.is_partial and unattached):
            add(None, "R1", "no token is attached to ROOT")
    elif len(roots) > 1:
        ids = ", ".join(str(tok.id) for tok in roots)
        add(roots[1].id, "R1", f"{len(roots)} tokens attached to ROOT ({ids})")
    for tok in sentence.tokens:
        if tok.head == ROOT and tok.primary != "root":
            add(tok.id, "R1", f"ROOT-headed token labelled {tok.deprel!r}, expected root")
        elif tok.head not in (None, ROOT) and tok.primary == "root":
            add(tok.id, "R1", f"token labelled root is headed by {tok.head}, not ROOT")


def _check_tree(sentence: AnnotatedSentence, add) -> None:
    for cycle in sentence.cycles():
        add(cycle[0], "R2", "cycle " + " -> ".join(str(n) for n in cycle))
    for tok in sentence.tokens:
        if tok.head is None:
            if not sentence.is_partial:
                add(tok.id, "R2", "token is unattached")
        elif tok.head != ROOT and tok.head not in sentence.by_id:
            add(tok.id, "R2", f"head {tok.head} does not exist")


def _check_order(tok: DepToken, add) -> None:
    if tok.primary in ("flat", "goeswith") and tok.head not in (None, ROOT) and tok.id < tok.head:
        add(tok.id, "R4", f"{tok.primary} dependent precedes its head {tok.head}")


def _check_goeswith(sentence: AnnotatedSentence, tok: DepToken, add) -> None:
    if tok.primary != "goeswith" or tok.head in (None, ROOT) or tok.head not in sentence.by_id:
        return
    if tok.is_empty or tok.head.is_empty or abs(tok.id.major - tok.head.major) != 1:
        add(tok.id, "R5", f"goeswith joins non-adjacent tokens {tok.head} and {tok.id}")


def _check_preterm(sentence: AnnotatedSentence, add) -> None:
    preterms = [tok for tok in sentence.tokens if tok.primary == "preterm"]
    if not preterms:
        return
    covered = set()
    for tok in preterms:
        covered |= _descendants(sentence, tok.id)
    for tok in preterms:
        trailing = [t for t in sentence.surface_tokens if t.id > tok.id and t.id not in covered]
        if trailing:
            add(tok.id, "R7", f"preterm fragment is followed by {trailing[0].form!r} ({trailing[0].id})")


def validate_sentence(
    sentence: AnnotatedSentence,
    tagset: Iterable[str],
    rules: RuleConfig = RuleConfig(),
    sent_id: str | None = None,
) -> ValidationReport:
    """
    Check one sentence against every enabled rule.

    Args:
        sentence: Sentence to check
        tagset: Allowed primary relation names
        rules: Enabled rules
        sent_id: Name used in the report (defaults to the sentence's sent_id)

    Returns:
        Report listing every violation found
    """
    tagset = frozenset(tagset)
    name = sent_id if sent_id is not None else sentence.sent_id
    found: list[Violation] = []

    def add(node, rule, message):
        if rules.on(rule):
            found.append(Violation(name, node, rule, RULES[rule][0], message))

    _check_root(sentence, add)
    _check_tree(sentence, add)
    for tok in sentence.tokens:
        if tok.primary is not None and tok.primary not in tagset:
            add(tok.id, "R3", f"relation {tok.primary!r} is not in the tagset")
        _check_order(tok, add)
        _check_goeswith(sentence, tok, add)
        if tok.primary == "reparandum" and tok.head not in (None, ROOT) and tok.id > tok.head:
            add(tok.id, "R6", f"reparandum follows its repair {tok.head}")
        if tok.primary == "punct":
            add(tok.id, "R8", f"punct token {tok.form!r} in a speech transcript")
    _check_preterm(sentence, add)

    return ValidationReport(tuple(sorted(found, key=Violation.sort_key)))


def _validate_indexed(item, tagset, rules):
    index, sentence = item
    return validate_sentence(sentence, tagset, rules, sentence.sent_id or f"#{index + 1}")


def validate_corpus(
    sentences: Sequence[AnnotatedSentence],
    tagset: Iterable[str],
    rules: RuleConfig = RuleConfig(),
    jobs: int = 1,
) -> ValidationReport:
    """Union of the per-sentence reports, ordered by (sent_id, rule)."""
    check = partial(_validate_indexed, tagset=frozenset(tagset), rules=rules)
    reports = map_sentences(check, list(enumerate(sentences)), jobs)
    violations = [v for report in reports for v in report.violations]
    report = ValidationReport(tuple(sorted(violations, key=Violation.sort_key)))
    log.info("validated %d sentences: %d errors, %d warnings",
             len(sentences), len(report.errors), len(report.warnings))
    return report
