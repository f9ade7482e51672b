"""
Pretrained Word Embeddings

Loads text-format vectors (`token v1 ... vD` per line, optional word2vec
"count dim" header) into a table with reserved <root> and <unk> rows.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

log = logging.getLogger(__name__)

ROOT_TOKEN = "<root>"
UNK_TOKEN = "<unk>"
RESERVED = (ROOT_TOKEN, UNK_TOKEN)


class EmbeddingError(ValueError):
    """Malformed embedding file."""

    def __init__(self, message: str, line_no: int | None = None, source: str | None = None):
        self.line_no = line_no
        self.source = source
        where = f"{source or '<embeddings>'}:{line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{message}")


@dataclass
class EmbeddingTable:
    """Row 0 is <root>, row 1 is <unk>; the rest follow file order."""
    vocabulary: dict[str, int]
    matrix: np.ndarray

    def __post_init__(self):
        for token in RESERVED:
            if token not in self.vocabulary:
                raise EmbeddingError(f"missing reserved row {token}")
        rows = sorted(self.vocabulary.values())
        if rows != list(range(len(rows))) or len(rows) != self.matrix.shape[0]:
            raise EmbeddingError("vocabulary rows do not match the matrix")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def root_index(self) -> int:
        return self.vocabulary[ROOT_TOKEN]

    @property
    def unk_index(self) -> int:
        return self.vocabulary[UNK_TOKEN]

    def __len__(self) -> int:
        return len(self.vocabulary)

    def index(self, form: str) -> int:
        """Row for a form: exact match, else lowercase match, else <unk>."""
        row = self.vocabulary.get(form)
        if row is None:
            row = self.vocabulary.get(form.lower(), self.unk_index)
        return row

    def lookup(self, form: str) -> np.ndarray:
        return self.matrix[self.index(form)]

    @property
    def words(self) -> list[str]:
        """Tokens in row order."""
        return sorted(self.vocabulary, key=self.vocabulary.__getitem__)

    @classmethod
    def from_vectors(cls, words: list[str], vectors: np.ndarray) -> "EmbeddingTable":
        """Reserved rows first: <root> at zero, <unk> at the mean of `vectors`."""
        dim = vectors.shape[1]
        unk = vectors.mean(axis=0) if len(vectors) else np.zeros(dim)
        matrix = np.vstack([np.zeros((1, dim)), unk[None, :], vectors]).astype(np.float32)
        vocabulary = {token: i for i, token in enumerate([*RESERVED, *words])}
        return cls(vocabulary, matrix)

    @classmethod
    def random(cls, forms: Iterable[str], dim: int, rng: np.random.Generator) -> "EmbeddingTable":
        """Trainable table over the distinct forms given, in first-seen order."""
        words = list(dict.fromkeys(f for f in forms if f not in RESERVED))
        vectors = rng.normal(0.0, 1.0 / np.sqrt(dim), size=(len(words), dim))
        return cls.from_vectors(words, vectors)


def _is_header(parts: list[str], dim: int) -> bool:
    return len(parts) == 2 and dim != 1 and all(p.isdigit() for p in parts)


def load_embeddings(path: str | Path, dim: int) -> EmbeddingTable:
    """
    Read a text embedding file of dimension `dim`.

    Raises EmbeddingError with the line number on a vector of the wrong
    length, a non-numeric value or a reserved token. Repeated tokens keep
    their first vector.
    """
    path = Path(path)
    words: list[str] = []
    seen: set[str] = set()
    rows: list[list[float]] = []

    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if line_no == 1 and _is_header(parts, dim):
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise EmbeddingError(f"expected {dim} values, found {len(values)}", line_no, str(path))
            if token in RESERVED:
                raise EmbeddingError(f"{token} is reserved", line_no, str(path))
            if token in seen:
                log.debug("%s:%d: duplicate token %r ignored", path, line_no, token)
                continue
            try:
                rows.append([float(v) for v in values])
            except ValueError as e:
                raise EmbeddingError(f"bad number: {e}", line_no, str(path)) from e
            seen.add(token)
            words.append(token)

    if not words:
        raise EmbeddingError(f"{path}: no vectors")
    table = EmbeddingTable.from_vectors(words, np.asarray(rows, dtype=np.float64))
    log.info("loaded %d vectors of dimension %d from %s", len(words), dim, path)
    return table
