"""
Parser Training

Mini-batch training with Adam, per-epoch dev evaluation, best-dev model
keeping and patience-based stopping; fine-tuning from a checkpoint; and
parsing of new sentences.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from treebank.model import ROOT, AnnotatedSentence, NodeId
from treebank.tagset import load_tagset

from .decoder import assign_labels, decode_mst
from .embeddings import UNK_TOKEN, EmbeddingTable
from .model import (
    ParserConfig, ParserModel, SentenceInput, accumulate_gradients, encode_sentence,
    init_model, score_sentence, sentence_loss, zero_gradients,
)

log = logging.getLogger(__name__)

STABLE_WINDOW = 3  # consecutive dev evaluations for the fine-tune stop rule


class TrainingError(ValueError):
    """Training cannot start with the data given."""


class CompatibilityError(ValueError):
    """A checkpoint does not fit the data or settings it is used with."""

    def __init__(self, message: str, component: str):
        self.component = component
        super().__init__(f"{component}: {message}")


# --- optimizer ----------------------------------------------------------

class Adam:
    """Adam over a parameter dict, updating arrays in place."""

    def __init__(self, params: dict[str, np.ndarray], lr: float, beta1: float, beta2: float, eps: float = 1e-12):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for name in params:
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            update = self.lr * (self.m[name] / correction1) / (np.sqrt(self.v[name] / correction2) + self.eps)
            params[name] -= update.astype(params[name].dtype)


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients together so their global norm is at most max_norm."""
    norm = math.sqrt(sum(float(np.sum(g.astype(np.float64) ** 2)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


# --- results ------------------------------------------------------------

@dataclass(frozen=True)
class DevMetrics:
    loss: float  # mean per scored token
    uas: float
    las: float


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_loss: float
    dev_uas: float
    dev_las: float

    def to_tsv(self) -> str:
        return f"{self.epoch}\t{self.train_loss:.6f}\t{self.dev_loss:.6f}\t{self.dev_uas:.2f}\t{self.dev_las:.2f}"


@dataclass
class TrainingResult:
    model: ParserModel
    log: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    initial: DevMetrics | None = None  # dev metrics before fine-tuning
    final: DevMetrics | None = None    # dev metrics of the returned model


TRAINING_LOG_HEADER = "epoch\ttrain_loss\tdev_loss\tdev_uas\tdev_las"


def format_training_log(records: Iterable[EpochRecord]) -> str:
    return "\n".join([TRAINING_LOG_HEADER, *(r.to_tsv() for r in records)]) + "\n"


def write_training_log(records: Iterable[EpochRecord], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(format_training_log(records), encoding="utf-8")
    return path


# --- evaluation ---------------------------------------------------------

def _predict(model: ParserModel, sentence: AnnotatedSentence) -> tuple[np.ndarray, list[str]]:
    arcs, label_scores = score_sentence(model, sentence)
    heads = decode_mst(arcs)
    return heads, assign_labels(label_scores, heads, model.labels)


def evaluate(model: ParserModel, corpus: Sequence[AnnotatedSentence]) -> DevMetrics:
    """
    Mean loss and attachment scores over the surface tokens that have a head
    in `corpus` (heads through empty nodes are followed to a surface token).
    """
    loss = 0.0
    scored = heads_right = labels_right = 0
    for sentence in corpus:
        if not sentence.surface_tokens:
            continue
        inp = encode_sentence(model, sentence)
        arc_loss, label_loss, count = sentence_loss(model, inp)
        loss += arc_loss + label_loss
        if not count:
            continue
        heads, labels = _predict(model, sentence)
        gold_labels = [tok.primary for tok in sentence.surface_tokens]
        for j in np.flatnonzero(inp.heads >= 0):
            scored += 1
            if heads[j] == inp.heads[j]:
                heads_right += 1
                if labels[j] == gold_labels[j]:
                    labels_right += 1
    if not scored:
        return DevMetrics(0.0, 0.0, 0.0)
    return DevMetrics(loss / scored, 100.0 * heads_right / scored, 100.0 * labels_right / scored)


# --- training -----------------------------------------------------------

def _label_vocabulary(corpora: Iterable[Sequence[AnnotatedSentence]], tagset: Sequence[str]) -> tuple[str, ...]:
    tags = set(tagset)
    for corpus in corpora:
        for sentence in corpus:
            for tok in sentence.surface_tokens:
                if tok.is_attached and tok.primary not in tags:
                    raise TrainingError(f"relation {tok.primary!r} in sentence {sentence.sent_id or '?'} is not in the tagset")
    return tuple(tagset)


def _singletons(model: ParserModel, corpus: Sequence[AnnotatedSentence]) -> np.ndarray:
    counts = Counter(tok.form for sentence in corpus for tok in sentence.surface_tokens)
    rows = {model.word_id(form) for form, n in counts.items() if n == 1}
    rows.discard(model.word_index[UNK_TOKEN])
    mask = np.zeros(len(model.words), dtype=bool)
    mask[list(rows)] = True
    return mask


def _word_dropout(inp: SentenceInput, singletons: np.ndarray, rate: float, unk: int, rng) -> SentenceInput:
    if rate <= 0:
        return inp
    drop = singletons[inp.word_ids] & (rng.random(len(inp.word_ids)) < rate)
    drop[0] = False
    if not drop.any():
        return inp
    return replace(inp, word_ids=np.where(drop, unk, inp.word_ids))


def _stabilized(dev_losses: list[float], epsilon: float) -> bool:
    """Relative dev-loss change below epsilon over the last STABLE_WINDOW evaluations."""
    if math.isinf(epsilon):
        return True
    if len(dev_losses) <= STABLE_WINDOW:
        return False
    recent = dev_losses[-(STABLE_WINDOW + 1):]
    return all(
        abs(b - a) / max(abs(a), 1e-12) < epsilon
        for a, b in zip(recent, recent[1:])
    )


def _run(
    model: ParserModel,
    train_corpus: Sequence[AnnotatedSentence],
    dev_corpus: Sequence[AnnotatedSentence],
    config: ParserConfig,
    epsilon: float | None = None,
) -> TrainingResult:
    """Shared loop of train and finetune; `epsilon` enables the stabilization stop rule."""
    rng = np.random.default_rng(config.seed)
    optimizer = Adam(model.params, config.learning_rate, config.beta1, config.beta2)
    inputs = [encode_sentence(model, s) for s in train_corpus if s.surface_tokens]
    singletons = _singletons(model, train_corpus)
    unk = model.word_index[UNK_TOKEN]

    initial = evaluate(model, dev_corpus)
    best = model.copy()
    best_metrics, best_epoch = initial, 0
    dev_losses = [initial.loss]
    records: list[EpochRecord] = []
    stale = 0

    for epoch in range(1, config.max_epochs + 1):
        if epsilon is not None and _stabilized(dev_losses, epsilon):
            log.info("dev loss stabilized after %d epochs", epoch - 1)
            break

        order = rng.permutation(len(inputs))
        total_loss, total_tokens = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            grads = zero_gradients(model)
            batch_tokens = 0
            for i in order[start:start + config.batch_size]:
                inp = _word_dropout(inputs[i], singletons, config.word_dropout, unk, rng)
                loss, count = accumulate_gradients(model, inp, grads, rng)
                total_loss += loss
                batch_tokens += count
            if not batch_tokens:
                continue
            total_tokens += batch_tokens
            for g in grads.values():
                g /= batch_tokens
            if config.freeze_embeddings:
                grads["embed"][2:] = 0.0  # only <root> and <unk> move
            clip_gradients(grads, config.clip_norm)
            optimizer.step(model.params, grads)

        metrics = evaluate(model, dev_corpus)
        dev_losses.append(metrics.loss)
        record = EpochRecord(epoch, total_loss / max(total_tokens, 1), metrics.loss, metrics.uas, metrics.las)
        records.append(record)
        log.info("epoch %d: train loss %.4f, dev loss %.4f, UAS %.2f, LAS %.2f",
                 epoch, record.train_loss, metrics.loss, metrics.uas, metrics.las)

        # from scratch the first epoch always replaces the untrained model
        if metrics.las > best_metrics.las or (best_epoch == 0 and epsilon is None):
            best, best_metrics, best_epoch = model.copy(), metrics, epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                log.info("no dev improvement for %d epochs, stopping", stale)
                break

    return TrainingResult(best, records, best_epoch, initial, best_metrics)


def train(
    train_corpus: Sequence[AnnotatedSentence],
    dev_corpus: Sequence[AnnotatedSentence],
    embeddings: EmbeddingTable | None,
    config: ParserConfig,
    tagset: Sequence[str] | None = None,
) -> TrainingResult:
    """
    Train a parser from scratch and return the best-dev model with its log.

    Without pretrained `embeddings` a random table over the training forms is
    used. The label vocabulary is the tagset, so fine-tuning never meets an
    unseen label.
    """
    if not any(s.surface_tokens for s in train_corpus):
        raise TrainingError("training corpus is empty")
    if not dev_corpus:
        raise TrainingError("dev corpus is empty")
    labels = _label_vocabulary([train_corpus], tagset if tagset is not None else load_tagset())
    if embeddings is None:
        rng = np.random.default_rng(config.seed)
        forms = (tok.form for s in train_corpus for tok in s.surface_tokens)
        embeddings = EmbeddingTable.random(forms, config.embed_dim, rng)

    model = init_model(config, labels, embeddings)
    log.info("training on %d sentences, %d words in vocabulary, %d labels",
             len(train_corpus), len(model.words), len(labels))
    return _run(model, train_corpus, dev_corpus, config)


def check_compatible(model: ParserModel, config: ParserConfig, corpora: Iterable[Sequence[AnnotatedSentence]]):
    """Raise CompatibilityError naming the first component that does not fit."""
    for name in model.config.shape_mismatches(config):
        raise CompatibilityError(
            f"checkpoint has {getattr(model.config, name)}, config asks for {getattr(config, name)}", name
        )
    known = set(model.labels)
    for corpus in corpora:
        for sentence in corpus:
            for tok in sentence.surface_tokens:
                if tok.is_attached and tok.primary not in known:
                    raise CompatibilityError(f"relation {tok.primary!r} is not in the checkpoint", "label vocabulary")


def finetune(
    checkpoint: ParserModel,
    train_corpus: Sequence[AnnotatedSentence],
    dev_corpus: Sequence[AnnotatedSentence],
    config: ParserConfig | None = None,
) -> TrainingResult:
    """
    Continue training a loaded model on new data with a fresh optimizer.

    Stops when the dev loss changes by less than `finetune_epsilon` (relative)
    over three consecutive evaluations, on patience, or at max_epochs. The
    result carries dev metrics from before and after.
    """
    config = config or checkpoint.config
    if not any(s.surface_tokens for s in train_corpus):
        raise TrainingError("fine-tuning corpus is empty")
    if not dev_corpus:
        raise TrainingError("dev corpus is empty")
    check_compatible(checkpoint, config, [train_corpus, dev_corpus])

    model = replace(checkpoint.copy(), config=config)
    result = _run(model, train_corpus, dev_corpus, config, epsilon=config.finetune_epsilon)
    log.info("fine-tuning: dev LAS %.2f -> %.2f", result.initial.las, result.final.las)
    return result


# --- inference ----------------------------------------------------------

def parse_sentence(model: ParserModel, sentence: AnnotatedSentence) -> AnnotatedSentence:
    """
    Attach every surface token. Empty nodes keep their annotation, except
    that one attached to ROOT moves under the predicted root with preterm.
    """
    if not sentence.surface_tokens:
        return sentence
    heads, labels = _predict(model, sentence)
    predicted = {
        tok.id: (ROOT if h == 0 else NodeId(int(h)), label)
        for tok, h, label in zip(sentence.surface_tokens, heads, labels)
    }
    root = next(node for node, (head, _) in predicted.items() if head == ROOT)
    tokens = []
    for tok in sentence.tokens:
        if tok.id in predicted:
            tok = replace(tok, head=predicted[tok.id][0], deprel=predicted[tok.id][1])
        elif tok.head == ROOT:
            tok = replace(tok, head=root, deprel="preterm")
        tokens.append(tok)
    return sentence.with_tokens(tokens)


def parse(model: ParserModel, sentences: Iterable[AnnotatedSentence]) -> list[AnnotatedSentence]:
    return [parse_sentence(model, s) for s in sentences]
