"""
Corpus augmentation: sample transformations per sentence at configured rates.

Every sentence draws from its own Philox stream keyed by (seed, sentence
index), so results do not depend on the order or the process that handles a
sentence.
"""
import logging
from collections import Counter
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from dotenv import dotenv_values

from treebank.corpus import map_sentences
from treebank.model import AnnotatedSentence

from .transforms import (
    CONTENT_UPOS, DEFAULT_FILLERS, add_filler, add_self_correction, add_stutter,
    drop_token_insert_empty, droppable_positions, split_word, truncate_preterm,
)

log = logging.getLogger(__name__)

# Order in which transformations are tried on a sentence; truncation is last
TRANSFORMS = ("word_drop", "word_split", "self_correct", "stutter", "filler", "preterm_truncate")

AUGMENTED_KEY = "augmented"


class AugmentConfigError(ValueError):
    """Invalid augmentation settings."""


@dataclass(frozen=True)
class AugmentConfig:
    seed: int = 42
    word_split: float = 0.05
    word_drop: float = 0.05
    preterm_truncate: float = 0.05  # share of turns an ASR system cuts short
    stutter: float = 0.10
    self_correct: float = 0.05
    filler: float = 0.10
    fillers: tuple[str, ...] = DEFAULT_FILLERS
    max_stutter_repeats: int = 2

    def __post_init__(self):
        object.__setattr__(self, "fillers", tuple(self.fillers))
        if not 0 <= self.seed < 2 ** 64:
            raise AugmentConfigError(f"seed must be a non-negative 64-bit integer, got {self.seed}")
        for name in TRANSFORMS:
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise AugmentConfigError(f"{name} rate must be in [0, 1], got {rate}")
        if self.filler > 0 and not any(word.strip() for word in self.fillers):
            raise AugmentConfigError("filler lexicon is empty but the filler rate is positive")
        if self.max_stutter_repeats < 1:
            raise AugmentConfigError("max_stutter_repeats must be at least 1")

    def rate(self, name: str) -> float:
        return getattr(self, name)

    @classmethod
    def from_file(
        cls, path: str | Path, seed: int | None = None, default_seed: int | None = None
    ) -> "AugmentConfig":
        """
        Read a `key = value` file. Recognized keys are the field names plus
        `filler_lexicon`, a path to a file with one filler per line (relative
        paths resolve against the config file). Keys are case-insensitive.

        `seed` wins over the file's seed; `default_seed` applies only when the
        file has none.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"augmentation config not found: {path}")
        raw = {k.lower(): v for k, v in dotenv_values(path).items() if v is not None}

        known = {f.name for f in fields(cls)} | {"filler_lexicon"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise AugmentConfigError(f"{path}: unknown keys {', '.join(unknown)}")

        values = {}
        try:
            for name in TRANSFORMS:
                if name in raw:
                    values[name] = float(raw[name])
            if "seed" in raw:
                values["seed"] = int(raw["seed"])
            if "max_stutter_repeats" in raw:
                values["max_stutter_repeats"] = int(raw["max_stutter_repeats"])
        except ValueError as e:
            raise AugmentConfigError(f"{path}: {e}") from e

        if "fillers" in raw:
            values["fillers"] = tuple(w.strip() for w in raw["fillers"].split(",") if w.strip())
        if "filler_lexicon" in raw:
            lexicon = Path(raw["filler_lexicon"])
            if not lexicon.is_absolute():
                lexicon = path.parent / lexicon
            words = lexicon.read_text(encoding="utf-8").splitlines()
            values["fillers"] = tuple(w.strip() for w in words if w.strip() and not w.startswith("#"))
        if seed is not None:
            values["seed"] = seed
        elif "seed" not in values and default_seed is not None:
            values["seed"] = default_seed
        return cls(**values)

    def with_seed(self, seed: int) -> "AugmentConfig":
        return replace(self, seed=seed)


def sentence_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for the sentence at `index` (0-based)."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _apply(name: str, sentence: AnnotatedSentence, config: AugmentConfig, rng: np.random.Generator):
    """One transformation at a random eligible site, or None when nothing is eligible."""
    n = len(sentence)
    if name == "word_drop":
        sites = droppable_positions(sentence)
        if not sites:
            return None
        return drop_token_insert_empty(sentence, sites[rng.integers(len(sites))])

    if name == "word_split":
        sites = [tok.id.major for tok in sentence.surface_tokens if len(tok.form) >= 2]
        if not sites:
            return None
        idx = sites[rng.integers(len(sites))]
        form = sentence.forms[idx - 1]
        return split_word(sentence, idx, int(rng.integers(1, len(form))))

    if name == "self_correct":
        tokens = sentence.surface_tokens
        sites = [tok.id.major for tok in tokens if tok.upos in CONTENT_UPOS]
        if not sites:
            return None
        idx = sites[rng.integers(len(sites))]
        repair = tokens[idx - 1]
        # start with another word of the same category when the sentence has one
        pool = [tok.form for tok in tokens if tok.upos == repair.upos and tok.form != repair.form]
        disfluent = pool[rng.integers(len(pool))] if pool else repair.form
        return add_self_correction(sentence, idx, disfluent)

    if name == "stutter":
        if not n:
            return None
        idx = int(rng.integers(1, n + 1))
        return add_stutter(sentence, idx, int(rng.integers(1, config.max_stutter_repeats + 1)))

    if name == "filler":
        if not sentence.root_tokens():
            return None
        words = [w for w in config.fillers if w.strip()]
        word = words[rng.integers(len(words))]
        return add_filler(sentence, int(rng.integers(1, n + 2)), word)

    if name == "preterm_truncate":
        if n < 2:
            return None
        return truncate_preterm(sentence, int(rng.integers(1, n)))

    raise ValueError(f"unknown transformation {name!r}")


def augment_sentence(
    sentence: AnnotatedSentence,
    config: AugmentConfig,
    rng: np.random.Generator,
) -> tuple[AnnotatedSentence, list[str]]:
    """
    Try each transformation once, applying it with probability equal to its rate.

    Returns the (possibly unchanged) sentence and the names of the
    transformations applied, which are also recorded in an "# augmented" comment.
    """
    applied = []
    for name in TRANSFORMS:
        # one draw per transformation whatever its rate
        if rng.random() >= config.rate(name):
            continue
        result = _apply(name, sentence, config, rng)
        if result is not None:
            sentence = result
            applied.append(name)
    if applied:
        sentence = sentence.with_comment(AUGMENTED_KEY, ",".join(applied))
    return sentence, applied


def _augment_item(item):
    index, sentence, config = item
    return augment_sentence(sentence, config, sentence_rng(config.seed, index))


def augment_with_counts(
    corpus: Sequence[AnnotatedSentence],
    config: AugmentConfig,
    jobs: int = 1,
) -> tuple[list[AnnotatedSentence], Counter]:
    """augment_corpus plus how often each transformation was applied."""
    items = [(i, sentence, config) for i, sentence in enumerate(corpus)]
    results = map_sentences(_augment_item, items, jobs)
    counts = Counter(name for _, applied in results for name in applied)
    for name in TRANSFORMS:
        log.info("%s applied to %d of %d sentences", name, counts[name], len(items))
    return [sentence for sentence, _ in results], counts


def augment_corpus(
    corpus: Sequence[AnnotatedSentence],
    config: AugmentConfig,
    jobs: int = 1,
) -> list[AnnotatedSentence]:
    """
    Augment every sentence independently.

    Output is a pure function of (corpus, config): the same inputs give the
    same sentences regardless of `jobs`.
    """
    sentences, _ = augment_with_counts(corpus, config, jobs)
    return sentences
