"""
CoNLL-U Reader and Writer

Lossless reading and canonical writing of the 10-column CoNLL-U format:
comments, empty nodes ("i.j") and multiword ranges ("i-j") all survive a
read/write round trip.
"""
import logging
import re
from pathlib import Path
from typing import Iterable, Iterator

from .model import AnnotatedSentence, DepToken, NodeId, ROOT

log = logging.getLogger(__name__)

ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC = range(10)

_TOKEN_ID = re.compile(r"^\d+(\.\d+)?$")
_RANGE_ID = re.compile(r"^\d+-\d+$")


class ConlluError(ValueError):
    """Malformed CoNLL-U input or an unwritable sentence."""

    def __init__(self, message: str, line_no: int | None = None, source: str | None = None):
        self.line_no = line_no
        self.source = source
        where = ""
        if source and line_no:
            where = f"{source}:{line_no}: "
        elif line_no:
            where = f"line {line_no}: "
        super().__init__(f"{where}{message}")


def _blocks(text: str) -> Iterator[list[tuple[int, str]]]:
    """Split a document into sentence blocks of (line number, line)."""
    block = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            if block:
                yield block
                block = []
            continue
        block.append((line_no, line))
    if block:
        yield block


def _parse_head(value: str, line_no: int, source: str) -> NodeId | None:
    if value == "_":
        return None
    try:
        return NodeId.parse(value)
    except ValueError:
        raise ConlluError(f"non-numeric HEAD {value!r}", line_no, source) from None


def _parse_block(block: list[tuple[int, str]], source: str) -> AnnotatedSentence:
    comments = []
    ranges = []
    tokens = []
    token_lines = []

    for line_no, line in block:
        if line.startswith("#"):
            if tokens or ranges:
                raise ConlluError("comment line after token lines", line_no, source)
            comments.append(line)
            continue

        columns = line.split("\t")
        if len(columns) != 10:
            raise ConlluError(f"expected 10 tab-separated columns, found {len(columns)}", line_no, source)

        node_id = columns[ID]
        if _RANGE_ID.match(node_id):
            ranges.append((len(tokens), line))
            continue
        if not _TOKEN_ID.match(node_id):
            raise ConlluError(f"non-numeric ID {node_id!r}", line_no, source)

        try:
            node = NodeId.parse(node_id)
            token = DepToken(
                id=node,
                form=columns[FORM],
                upos=columns[UPOS],
                head=_parse_head(columns[HEAD], line_no, source),
                deprel=None if columns[DEPREL] == "_" else columns[DEPREL],
                misc=columns[MISC],
                lemma=columns[LEMMA],
                xpos=columns[XPOS],
                feats=columns[FEATS],
                deps=columns[DEPS],
            )
        except ConlluError:
            raise
        except ValueError as e:
            raise ConlluError(str(e), line_no, source) from None

        if tokens and token.id <= tokens[-1].id:
            problem = "duplicate" if token.id == tokens[-1].id else "out-of-order"
            raise ConlluError(f"{problem} node id {token.id}", line_no, source)
        tokens.append(token)
        token_lines.append(line_no)

    first_line = block[0][0]
    if not tokens:
        raise ConlluError("sentence block has no token lines", first_line, source)

    surface = [tok.id.major for tok in tokens if not tok.is_empty]
    if surface != list(range(1, len(surface) + 1)):
        raise ConlluError("surface token ids are not numbered 1..n", first_line, source)

    known = {tok.id for tok in tokens}
    for tok, line_no in zip(tokens, token_lines):
        if tok.head is not None and tok.head != ROOT and tok.head not in known:
            raise ConlluError(f"HEAD {tok.head} out of range", line_no, source)
        if tok.is_empty and tok.id.major > len(surface):
            raise ConlluError(f"empty node {tok.id} lies past the last surface token", line_no, source)

    return AnnotatedSentence(tokens=tuple(tokens), comments=tuple(comments), passthrough_ranges=tuple(ranges))


def parse_conllu(text: str, source: str = "<string>") -> list[AnnotatedSentence]:
    """
    Parse a CoNLL-U document.

    Args:
        text: Document contents
        source: Name used in error messages

    Returns:
        Sentences in document order
    """
    return [_parse_block(block, source) for block in _blocks(text)]


def _token_line(tok: DepToken) -> str:
    return "\t".join([
        str(tok.id),
        tok.form,
        tok.lemma,
        tok.upos,
        tok.xpos,
        tok.feats,
        "_" if tok.head is None else str(tok.head),
        "_" if tok.deprel is None else tok.deprel,
        tok.deps,
        tok.misc,
    ])


def format_sentence(sentence: AnnotatedSentence) -> str:
    """One sentence block including its trailing blank line."""
    lines = list(sentence.comments)
    pending = sorted(sentence.passthrough_ranges, key=lambda item: item[0])
    cursor = 0
    for emitted, tok in enumerate(sentence.tokens):
        while cursor < len(pending) and pending[cursor][0] <= emitted:
            lines.append(pending[cursor][1])
            cursor += 1
        lines.append(_token_line(tok))
    lines.extend(line for _, line in pending[cursor:])
    return "\n".join(lines) + "\n\n"


def write_conllu(sentences: Iterable[AnnotatedSentence]) -> str:
    """
    Serialize sentences canonically.

    Every sentence is checked before anything is produced, so a bad sentence
    never leaves a half-written document behind.
    """
    sentences = list(sentences)
    for index, sentence in enumerate(sentences):
        problems = sentence.invariant_problems()
        if problems:
            label = sentence.sent_id or f"#{index + 1}"
            raise ConlluError(f"sentence {label}: " + "; ".join(problems))
    return "".join(format_sentence(s) for s in sentences)


def read_conllu(path: str | Path) -> list[AnnotatedSentence]:
    """Read a CoNLL-U file (UTF-8)."""
    path = Path(path)
    sentences = parse_conllu(path.read_text(encoding="utf-8"), source=str(path))
    log.debug("read %d sentences from %s", len(sentences), path)
    return sentences


def read_corpora(paths: Iterable[str | Path]) -> list[AnnotatedSentence]:
    """Read several files and concatenate them in argument order."""
    corpus = []
    for path in paths:
        corpus.extend(read_conllu(path))
    return corpus


def save_conllu(sentences: Iterable[AnnotatedSentence], path: str | Path) -> None:
    """Write sentences to a file with LF line endings."""
    text = write_conllu(sentences)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
