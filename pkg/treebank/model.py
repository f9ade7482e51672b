"""
SCUD Treebank Data Model

Immutable token and sentence types for SCUD-annotated dependency graphs,
including empty nodes standing in for words the ASR system dropped.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Optional


UPOS_TAGS = frozenset({
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
})

# Comment keys with a meaning of their own
SENT_ID_KEY = "sent_id"
TEXT_KEY = "text"
PARTIAL_KEY = "partial"


class NodeId(NamedTuple):
    """Position of a node: (major, minor), minor = 0 for surface tokens."""
    major: int
    minor: int = 0

    @classmethod
    def parse(cls, text: str) -> "NodeId":
        """Parse "3" or "3.1". Raises ValueError on anything else."""
        major, dot, minor = text.partition(".")
        if not major.isdigit() or (dot and not minor.isdigit()):
            raise ValueError(f"not a node id: {text!r}")
        node = cls(int(major), int(minor) if dot else 0)
        if dot and node.minor < 1:
            raise ValueError(f"empty node minor must be >= 1: {text!r}")
        return node

    @property
    def is_empty(self) -> bool:
        return self.minor >= 1

    def __str__(self) -> str:
        return f"{self.major}.{self.minor}" if self.minor else str(self.major)


ROOT = NodeId(0, 0)


def primary_relation(label: str) -> str:
    """Collapse a relation label to its primary name ("flat:foreign" -> "flat")."""
    return label.split(":", 1)[0]


@dataclass(frozen=True)
class RelationTag:
    """A relation label split into its primary name and optional subtype."""
    name: str
    subtype: Optional[str] = None

    @classmethod
    def parse(cls, label: str) -> "RelationTag":
        name, _, subtype = label.partition(":")
        return cls(name, subtype or None)

    def __str__(self) -> str:
        return f"{self.name}:{self.subtype}" if self.subtype else self.name


@dataclass(frozen=True)
class DepToken:
    """
    One surface token or empty node.

    `head` is None and `deprel` is None for unattached tokens; ROOT-headed
    tokens carry head == ROOT. LEMMA/XPOS/FEATS/DEPS are kept verbatim.
    """
    id: NodeId
    form: str
    upos: str = "_"
    head: Optional[NodeId] = None
    deprel: Optional[str] = None
    misc: str = "_"
    lemma: str = "_"
    xpos: str = "_"
    feats: str = "_"
    deps: str = "_"

    def __post_init__(self):
        if not self.form:
            raise ValueError(f"token {self.id}: empty form")
        if any(ch in self.form for ch in "\t\n\r"):
            raise ValueError(f"token {self.id}: form contains tab or newline")
        if self.upos != "_" and self.upos not in UPOS_TAGS:
            raise ValueError(f"token {self.id}: unknown UPOS {self.upos!r}")
        if self.head is not None and self.head == self.id:
            raise ValueError(f"token {self.id}: token heads itself")
        if (self.head is None) != (self.deprel is None):
            raise ValueError(f"token {self.id}: head and deprel must both be set or both unattached")

    @property
    def is_empty(self) -> bool:
        return self.id.is_empty

    @property
    def is_attached(self) -> bool:
        return self.head is not None

    @property
    def relation(self) -> RelationTag | None:
        return RelationTag.parse(self.deprel) if self.deprel is not None else None

    @property
    def primary(self) -> str | None:
        """Primary relation name with any subtype dropped."""
        return primary_relation(self.deprel) if self.deprel is not None else None


@dataclass(frozen=True)
class AnnotatedSentence:
    """
    One utterance: tokens in NodeId order, comment lines (verbatim, with the
    leading "#"), and multiword-token range lines kept as
    (number of tokens preceding the line, verbatim line).
    """
    tokens: tuple[DepToken, ...]
    comments: tuple[str, ...] = ()
    passthrough_ranges: tuple[tuple[int, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "comments", tuple(self.comments))
        object.__setattr__(self, "passthrough_ranges", tuple(tuple(p) for p in self.passthrough_ranges))

    # --- metadata -----------------------------------------------------

    def comment_value(self, key: str) -> str | None:
        prefix = f"# {key} ="
        for line in self.comments:
            if line.startswith(prefix):
                return line[len(prefix):].strip()
        return None

    @property
    def sent_id(self) -> str:
        return self.comment_value(SENT_ID_KEY) or ""

    @property
    def raw_text(self) -> str:
        return self.comment_value(TEXT_KEY) or ""

    @property
    def is_partial(self) -> bool:
        return (self.comment_value(PARTIAL_KEY) or "").lower() == "yes"

    def with_comment(self, key: str, value: str) -> "AnnotatedSentence":
        """Set "# key = value", replacing an existing line with that key."""
        line = f"# {key} = {value}"
        prefix = f"# {key} ="
        comments = list(self.comments)
        for i, existing in enumerate(comments):
            if existing.startswith(prefix):
                comments[i] = line
                break
        else:
            comments.append(line)
        return replace(self, comments=tuple(comments))

    def with_tokens(self, tokens, passthrough_ranges=None) -> "AnnotatedSentence":
        return replace(
            self,
            tokens=tuple(tokens),
            passthrough_ranges=self.passthrough_ranges if passthrough_ranges is None else passthrough_ranges,
        )

    # --- lookups ------------------------------------------------------

    @cached_property
    def by_id(self) -> dict[NodeId, DepToken]:
        return {tok.id: tok for tok in self.tokens}

    @property
    def surface_tokens(self) -> tuple[DepToken, ...]:
        return tuple(tok for tok in self.tokens if not tok.is_empty)

    @property
    def empty_nodes(self) -> tuple[DepToken, ...]:
        return tuple(tok for tok in self.tokens if tok.is_empty)

    @property
    def forms(self) -> list[str]:
        """Surface forms in order."""
        return [tok.form for tok in self.surface_tokens]

    def __len__(self) -> int:
        return len(self.surface_tokens)

    def token(self, node: NodeId) -> DepToken:
        return self.by_id[node]

    def dependents(self, node: NodeId) -> list[DepToken]:
        return [tok for tok in self.tokens if tok.head == node]

    def root_tokens(self) -> list[DepToken]:
        return [tok for tok in self.tokens if tok.head == ROOT]

    # --- structure ----------------------------------------------------

    def cycles(self) -> list[tuple[NodeId, ...]]:
        """Every cycle in the head function, each listed once from its smallest node."""
        found = []
        state: dict[NodeId, int] = {}  # 1 = on current path, 2 = done
        for start in self.by_id:
            path = []
            node = start
            while node in self.by_id and node not in state:
                state[node] = 1
                path.append(node)
                node = self.by_id[node].head
            if node in self.by_id and state.get(node) == 1:
                cycle = path[path.index(node):]
                pivot = cycle.index(min(cycle))
                found.append(tuple(cycle[pivot:] + cycle[:pivot]))
            for visited in path:
                state[visited] = 2
        return sorted(found)

    def invariant_problems(self) -> list[str]:
        """Structural problems that make the sentence unwritable (empty if fine)."""
        problems = []
        if not self.tokens:
            return ["sentence has no tokens"]
        ids = [tok.id for tok in self.tokens]
        if len(set(ids)) != len(ids):
            problems.append("duplicate node ids")
        if ids != sorted(ids):
            problems.append("tokens are not in node id order")
        majors = [tok.id.major for tok in self.surface_tokens]
        if majors != list(range(1, len(majors) + 1)):
            problems.append("surface token ids are not 1..n")
        for node in (tok.id for tok in self.empty_nodes):
            if node.major > len(majors):
                problems.append(f"empty node {node} lies past the last surface token")
        for tok in self.tokens:
            if tok.head is not None and tok.head != ROOT and tok.head not in self.by_id:
                problems.append(f"token {tok.id} has head {tok.head} which does not exist")
        for cycle in self.cycles():
            problems.append("cycle through " + " -> ".join(str(n) for n in cycle))
        return problems


def materialize_empty_nodes(sentence: AnnotatedSentence) -> AnnotatedSentence:
    """
    Re-index empty nodes into the surface sequence (Table 1 display style).

    Every node gets an integer index equal to its position in NodeId order;
    heads and multiword range ids are remapped accordingly.
    """
    if not sentence.empty_nodes:
        return sentence

    mapping = {tok.id: NodeId(i) for i, tok in enumerate(sentence.tokens, start=1)}
    mapping[ROOT] = ROOT

    tokens = [
        replace(
            tok,
            id=mapping[tok.id],
            head=mapping.get(tok.head) if tok.head is not None else None,
        )
        for tok in sentence.tokens
    ]

    ranges = []
    for position, line in sentence.passthrough_ranges:
        range_id, _, rest = line.partition("\t")
        start, _, end = range_id.partition("-")
        try:
            new_start = mapping[NodeId(int(start))].major
            new_end = mapping[NodeId(int(end))].major
        except (KeyError, ValueError):
            # range points outside the sentence; leave it untouched
            ranges.append((position, line))
            continue
        ranges.append((position, f"{new_start}-{new_end}\t{rest}"))

    return sentence.with_tokens(tokens, tuple(ranges))


def edge_multiset(sentence: AnnotatedSentence) -> list[tuple[str, str, str]]:
    """Sorted (head form, dependent form, deprel) triples; ROOT appears as "<root>"."""
    edges = []
    for tok in sentence.tokens:
        if tok.head is None:
            continue
        head_form = "<root>" if tok.head == ROOT else sentence.token(tok.head).form
        edges.append((head_form, tok.form, tok.deprel))
    return sorted(edges)
