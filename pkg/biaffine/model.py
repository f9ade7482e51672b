"""
Biaffine Dependency Parser Model

Word (and optionally POS) embeddings feed a stack of bidirectional LSTMs;
four leaky-ReLU projections of the top layer give head and dependent views
for arcs and labels, scored by a biaffine arc matrix and one biaffine
matrix per relation. Parameters live in a flat name -> array dict so the
trainer, the optimizer and the checkpoint format all see the same blocks.
"""
import math
from dataclasses import asdict, dataclass, fields, replace
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from dotenv import dotenv_values

from treebank.model import ROOT, UPOS_TAGS, AnnotatedSentence

from .embeddings import ROOT_TOKEN, UNK_TOKEN, EmbeddingTable
from .layers import dropout_mask, leaky_relu, leaky_relu_grad, log_softmax, lstm_backward, lstm_forward


POS_VOCAB = (ROOT_TOKEN, UNK_TOKEN, *sorted(UPOS_TAGS))
PROJECTIONS = ("arc_head", "arc_dep", "label_head", "label_dep")

# Fields that fix parameter shapes; a checkpoint only accepts configs agreeing on these
SHAPE_FIELDS = ("embed_dim", "hidden_size", "layers", "arc_dim", "label_dim", "use_pos")


class ParserConfigError(ValueError):
    """Invalid parser hyperparameters."""


@dataclass(frozen=True)
class ParserConfig:
    embed_dim: int = 100
    hidden_size: int = 200    # per direction
    layers: int = 2
    arc_dim: int = 400
    label_dim: int = 100
    dropout: float = 0.33
    word_dropout: float = 0.2  # singletons replaced by <unk> during training
    learning_rate: float = 2e-3
    beta1: float = 0.9
    beta2: float = 0.9
    clip_norm: float = 5.0
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 20
    finetune_epsilon: float = 0.001
    seed: int = 42
    use_pos: bool = False
    freeze_embeddings: bool = False

    def __post_init__(self):
        for name in ("embed_dim", "hidden_size", "layers", "arc_dim", "label_dim", "batch_size", "patience"):
            if getattr(self, name) < 1:
                raise ParserConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("dropout", "word_dropout", "beta1", "beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ParserConfigError(f"{name} must be in [0, 1), got {getattr(self, name)}")
        if self.learning_rate <= 0 or self.clip_norm <= 0:
            raise ParserConfigError("learning_rate and clip_norm must be positive")
        if self.max_epochs < 0:
            raise ParserConfigError("max_epochs must not be negative")
        if self.finetune_epsilon < 0 or math.isnan(self.finetune_epsilon):
            raise ParserConfigError("finetune_epsilon must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "ParserConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ParserConfigError(f"unknown parser settings: {', '.join(unknown)}")
        return cls(**values)

    @classmethod
    def from_file(cls, path: str | Path, fallback: dict | None = None, **overrides) -> "ParserConfig":
        """
        Read `key = value` settings. Keyword overrides win over the file, and
        `fallback` values fill in keys the file leaves out.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"parser config not found: {path}")
        raw = {k.lower(): v for k, v in dotenv_values(path).items() if v is not None}
        defaults = cls()
        values = dict(fallback or {})
        for key, text in raw.items():
            if not hasattr(defaults, key):
                raise ParserConfigError(f"{path}: unknown setting {key!r}")
            values[key] = _cast(text, getattr(defaults, key), key)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(values)

    def with_overrides(self, **overrides) -> "ParserConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def shape_mismatches(self, other: "ParserConfig") -> list[str]:
        return [name for name in SHAPE_FIELDS if getattr(self, name) != getattr(other, name)]


def _cast(text: str, default, key: str):
    try:
        if isinstance(default, bool):
            lowered = text.strip().lower()
            if lowered not in {"true", "false", "1", "0", "yes", "no"}:
                raise ValueError(f"not a boolean: {text!r}")
            return lowered in {"true", "1", "yes"}
        return type(default)(text)
    except ValueError as e:
        raise ParserConfigError(f"{key}: {e}") from e


# --- parameters ---------------------------------------------------------

def block_shapes(config: ParserConfig, vocab_size: int, n_labels: int) -> dict[str, tuple[int, ...]]:
    """Every parameter block's name and shape, in checkpoint order."""
    D, H, A, B = config.embed_dim, config.hidden_size, config.arc_dim, config.label_dim
    shapes = {"embed": (vocab_size, D)}
    if config.use_pos:
        shapes["pos_embed"] = (len(POS_VOCAB), D)
    n_in = D
    for layer in range(config.layers):
        for direction in ("fw", "bw"):
            shapes[f"lstm{layer}.{direction}.W"] = (4 * H, n_in + H)
            shapes[f"lstm{layer}.{direction}.b"] = (4 * H,)
        n_in = 2 * H
    for name in PROJECTIONS:
        size = A if name.startswith("arc") else B
        shapes[f"{name}.W"] = (size, 2 * H)
        shapes[f"{name}.b"] = (size,)
    shapes["arc_U"] = (A + 1, A)
    shapes["label_U"] = (n_labels, B + 1, B + 1)
    return shapes


@dataclass
class ParserModel:
    config: ParserConfig
    words: tuple[str, ...]   # embedding rows; row 0 <root>, row 1 <unk>
    labels: tuple[str, ...]  # primary relation names
    params: dict[str, np.ndarray]

    @cached_property
    def word_index(self) -> dict[str, int]:
        return {word: i for i, word in enumerate(self.words)}

    @cached_property
    def label_index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    @property
    def dtype(self):
        return self.params["embed"].dtype

    def word_id(self, form: str) -> int:
        index = self.word_index
        row = index.get(form)
        if row is None:
            row = index.get(form.lower(), index[UNK_TOKEN])
        return row

    def copy(self) -> "ParserModel":
        return ParserModel(self.config, self.words, self.labels, {k: v.copy() for k, v in self.params.items()})

    def astype(self, dtype) -> "ParserModel":
        return ParserModel(self.config, self.words, self.labels, {k: v.astype(dtype) for k, v in self.params.items()})


def init_model(config: ParserConfig, labels: Sequence[str], embeddings: EmbeddingTable) -> ParserModel:
    """Fresh model; biaffine weights start at zero so every head is equally likely."""
    if embeddings.dim != config.embed_dim:
        raise ParserConfigError(f"embeddings have dimension {embeddings.dim}, config says {config.embed_dim}")
    rng = np.random.default_rng(config.seed)
    shapes = block_shapes(config, len(embeddings), len(labels))
    H = config.hidden_size

    params = {}
    for name, shape in shapes.items():
        if name == "embed":
            block = embeddings.matrix
        elif name in ("arc_U", "label_U") or name.endswith(".b"):
            block = np.zeros(shape)
        else:
            block = rng.normal(0.0, 1.0 / np.sqrt(shape[-1]), size=shape)
        if name.startswith("lstm") and name.endswith(".b"):
            block[H:2 * H] = 1.0  # forget gate
        params[name] = np.array(block, dtype=np.float32)

    return ParserModel(config, tuple(embeddings.words), tuple(labels), params)


# --- inputs -------------------------------------------------------------

@dataclass(frozen=True)
class SentenceInput:
    """Index arrays for one sentence; position 0 is the artificial root."""
    word_ids: np.ndarray  # (n + 1,)
    pos_ids: np.ndarray   # (n + 1,)
    heads: np.ndarray     # (n,) gold head position, -1 when not scored
    labels: np.ndarray    # (n,) gold label index, -1 when not scored

    @property
    def length(self) -> int:
        return len(self.heads)


def surface_heads(sentence: AnnotatedSentence) -> list[int | None]:
    """
    Head of every surface token as a surface position (0 = ROOT).

    A head that is an empty node is replaced by that node's own head until a
    surface token or ROOT is reached; None marks unattached tokens.
    """
    heads = []
    for tok in sentence.surface_tokens:
        head = tok.head
        seen = set()
        while head is not None and head.is_empty and head not in seen:
            seen.add(head)
            node = sentence.by_id.get(head)
            head = node.head if node is not None else None
        heads.append(None if head is None or head.is_empty else head.major)
    return heads


def encode_sentence(model: ParserModel, sentence: AnnotatedSentence) -> SentenceInput:
    """Surface tokens only; empty nodes never reach the parser."""
    tokens = sentence.surface_tokens
    word_ids = np.array([0] + [model.word_id(tok.form) for tok in tokens], dtype=np.int64)
    pos_lookup = {tag: i for i, tag in enumerate(POS_VOCAB)}
    pos_ids = np.array([0] + [pos_lookup.get(tok.upos, 1) for tok in tokens], dtype=np.int64)

    heads = np.full(len(tokens), -1, dtype=np.int64)
    labels = np.full(len(tokens), -1, dtype=np.int64)
    for j, (tok, head) in enumerate(zip(tokens, surface_heads(sentence))):
        if head is None:
            continue
        label = model.label_index.get(tok.primary)
        if label is None:
            continue
        heads[j] = head
        labels[j] = label
    return SentenceInput(word_ids, pos_ids, heads, labels)


# --- forward ------------------------------------------------------------

def _forward(model: ParserModel, inp: SentenceInput, rng: np.random.Generator | None = None):
    """Scores plus everything the backward pass needs. `rng` switches dropout on."""
    p, cfg = model.params, model.config
    dtype = model.dtype
    cache = {}

    x = p["embed"][inp.word_ids]
    if cfg.use_pos:
        x = x + p["pos_embed"][inp.pos_ids]
    mask = dropout_mask(rng, x.shape, cfg.dropout, dtype)
    if mask is not None:
        x = x * mask
    cache["embed_mask"] = mask

    layers = []
    for layer in range(cfg.layers):
        h_fw, c_fw = lstm_forward(x, p[f"lstm{layer}.fw.W"], p[f"lstm{layer}.fw.b"])
        h_bw, c_bw = lstm_forward(x, p[f"lstm{layer}.bw.W"], p[f"lstm{layer}.bw.b"], reverse=True)
        x = np.concatenate([h_fw, h_bw], axis=1)
        mask = dropout_mask(rng, x.shape, cfg.dropout, dtype)
        if mask is not None:
            x = x * mask
        layers.append((c_fw, c_bw, mask))
    cache["layers"] = layers
    cache["top"] = x

    reps = {}
    for name in PROJECTIONS:
        z = x @ p[f"{name}.W"].T + p[f"{name}.b"]
        r = leaky_relu(z)
        mask = dropout_mask(rng, r.shape, cfg.dropout, dtype)
        if mask is not None:
            r = r * mask
        reps[name] = r
        cache[name] = (z, mask)

    ones = np.ones((len(inp.word_ids), 1), dtype=dtype)
    dep_arc = np.hstack([reps["arc_dep"], ones])
    dep_label = np.hstack([reps["label_dep"], ones])
    head_label = np.hstack([reps["label_head"], ones])
    scores = dep_arc @ p["arc_U"] @ reps["arc_head"].T  # [dependent, head]

    cache.update(reps=reps, dep_arc=dep_arc, dep_label=dep_label, head_label=head_label)
    return scores, cache


def _arc_matrix(scores: np.ndarray) -> np.ndarray:
    """(n+1) x n head-by-dependent matrix with -inf where a token would head itself."""
    arcs = scores[1:, :].T.copy()
    n = arcs.shape[1]
    arcs[np.arange(n) + 1, np.arange(n)] = -np.inf
    return arcs


def _label_tensor(label_U: np.ndarray, dep_label: np.ndarray, head_label: np.ndarray) -> np.ndarray:
    partial = np.einsum("di,rij->drj", dep_label[1:], label_U)
    return np.einsum("drj,hj->hdr", partial, head_label)


def score_sentence(model: ParserModel, sentence: AnnotatedSentence) -> tuple[np.ndarray, np.ndarray]:
    """
    Inference scores for one sentence's surface tokens.

    Returns the (n+1) x n arc matrix (row 0 = ROOT as head) and the
    (n+1) x n x |R| label tensor.
    """
    if not sentence.surface_tokens:
        raise ValueError("sentence has no surface tokens")
    inp = encode_sentence(model, sentence)
    scores, cache = _forward(model, inp)
    labels = _label_tensor(model.params["label_U"], cache["dep_label"], cache["head_label"])
    return _arc_matrix(scores), labels


# --- loss and backward --------------------------------------------------

def zero_gradients(model: ParserModel) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(block) for name, block in model.params.items()}


def accumulate_gradients(
    model: ParserModel,
    inp: SentenceInput,
    grads: dict[str, np.ndarray],
    rng: np.random.Generator | None = None,
) -> tuple[float, int]:
    """
    Add the gradient of this sentence's summed loss into `grads`.

    The loss is the cross-entropy of each scored token's gold head over all
    candidate heads plus the cross-entropy of its gold label at the gold
    head. Returns (loss, number of scored tokens).
    """
    p, cfg = model.params, model.config
    scores, cache = _forward(model, inp, rng)
    arcs = _arc_matrix(scores)
    m = len(inp.word_ids)

    cols = np.flatnonzero(inp.heads >= 0)
    if not cols.size:
        return 0.0, 0
    gold_heads = inp.heads[cols]
    gold_labels = inp.labels[cols]

    # arcs
    log_p = log_softmax(arcs, axis=0)
    arc_loss = -log_p[gold_heads, cols].sum()
    d_arcs = np.exp(log_p)
    d_arcs[:, inp.heads < 0] = 0.0
    d_arcs[gold_heads, cols] -= 1.0
    d_scores = np.zeros((m, m), dtype=scores.dtype)
    d_scores[1:, :] = d_arcs.T

    head_arc, dep_arc, arc_U = cache["reps"]["arc_head"], cache["dep_arc"], p["arc_U"]
    grads["arc_U"] += dep_arc.T @ d_scores @ head_arc
    d_reps = {
        "arc_dep": (d_scores @ head_arc @ arc_U.T)[:, :-1],
        "arc_head": d_scores.T @ dep_arc @ arc_U,
    }

    # labels, scored at the gold head
    label_U = p["label_U"]
    dep_rows = cache["dep_label"][cols + 1]
    head_rows = cache["head_label"][gold_heads]
    label_scores = np.einsum("ki,rij,kj->kr", dep_rows, label_U, head_rows, optimize=True)
    log_q = log_softmax(label_scores, axis=1)
    rows = np.arange(len(cols))
    label_loss = -log_q[rows, gold_labels].sum()
    d_label = np.exp(log_q)
    d_label[rows, gold_labels] -= 1.0

    grads["label_U"] += np.einsum("kr,ki,kj->rij", d_label, dep_rows, head_rows, optimize=True)
    d_dep_label = np.zeros_like(cache["dep_label"])
    d_head_label = np.zeros_like(cache["head_label"])
    np.add.at(d_dep_label, cols + 1, np.einsum("kr,rij,kj->ki", d_label, label_U, head_rows, optimize=True))
    np.add.at(d_head_label, gold_heads, np.einsum("kr,rij,ki->kj", d_label, label_U, dep_rows, optimize=True))
    d_reps["label_dep"] = d_dep_label[:, :-1]
    d_reps["label_head"] = d_head_label[:, :-1]

    # projections
    top = cache["top"]
    d_top = np.zeros_like(top)
    for name in PROJECTIONS:
        z, mask = cache[name]
        d_r = d_reps[name] if mask is None else d_reps[name] * mask
        d_z = d_r * leaky_relu_grad(z)
        grads[f"{name}.W"] += d_z.T @ top
        grads[f"{name}.b"] += d_z.sum(axis=0)
        d_top += d_z @ p[f"{name}.W"]

    # encoder
    H = cfg.hidden_size
    d_x = d_top
    for layer in reversed(range(cfg.layers)):
        c_fw, c_bw, mask = cache["layers"][layer]
        if mask is not None:
            d_x = d_x * mask
        dx_fw, dW_fw, db_fw = lstm_backward(d_x[:, :H], c_fw)
        dx_bw, dW_bw, db_bw = lstm_backward(d_x[:, H:], c_bw)
        grads[f"lstm{layer}.fw.W"] += dW_fw
        grads[f"lstm{layer}.fw.b"] += db_fw
        grads[f"lstm{layer}.bw.W"] += dW_bw
        grads[f"lstm{layer}.bw.b"] += db_bw
        d_x = dx_fw + dx_bw

    if cache["embed_mask"] is not None:
        d_x = d_x * cache["embed_mask"]
    np.add.at(grads["embed"], inp.word_ids, d_x)
    if cfg.use_pos:
        np.add.at(grads["pos_embed"], inp.pos_ids, d_x)

    return float(arc_loss + label_loss), int(cols.size)


def loss_and_gradients(model: ParserModel, inp: SentenceInput, rng=None):
    """Summed loss and its gradient for one sentence (fresh gradient dict)."""
    grads = zero_gradients(model)
    loss, _ = accumulate_gradients(model, inp, grads, rng)
    return loss, grads


def sentence_loss(model: ParserModel, inp: SentenceInput) -> tuple[float, float, int]:
    """Inference-mode (arc loss, label loss, scored tokens) without gradients."""
    scores, cache = _forward(model, inp)
    cols = np.flatnonzero(inp.heads >= 0)
    if not cols.size:
        return 0.0, 0.0, 0
    log_p = log_softmax(_arc_matrix(scores), axis=0)
    arc_loss = -log_p[inp.heads[cols], cols].sum()
    dep_rows = cache["dep_label"][cols + 1]
    head_rows = cache["head_label"][inp.heads[cols]]
    label_scores = np.einsum("ki,rij,kj->kr", dep_rows, model.params["label_U"], head_rows, optimize=True)
    log_q = log_softmax(label_scores, axis=1)
    label_loss = -log_q[np.arange(len(cols)), inp.labels[cols]].sum()
    return float(arc_loss), float(label_loss), int(cols.size)
