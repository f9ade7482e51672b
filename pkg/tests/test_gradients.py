import math

import numpy as np
import pytest

from biaffine import EmbeddingTable, ParserConfig, decode_mst, init_model, score_sentence
from biaffine.model import encode_sentence, loss_and_gradients, sentence_loss
from conftest import make_sentence

LABELS = ("root", "nsubj", "obj", "det", "amod")


def _tiny_model(use_pos, seed=0):
    config = ParserConfig(
        embed_dim=3, hidden_size=2, layers=2, arc_dim=3, label_dim=2,
        dropout=0.0, word_dropout=0.0, use_pos=use_pos, seed=seed,
    )
    rng = np.random.default_rng(seed)
    table = EmbeddingTable.random(["I", "like", "the", "big", "dog"], 3, rng)
    model = init_model(config, LABELS, table).astype(np.float64)
    # zero-initialized biaffine weights would hide half the gradient paths
    for name, block in model.params.items():
        model.params[name] = rng.normal(0.0, 0.5, size=block.shape)
    return model


def _relative_error(a, b, floor=1e-10):
    # a block whose true gradient is zero leaves only rounding noise
    scale = np.linalg.norm(a) + np.linalg.norm(b)
    return 0.0 if scale < floor else float(np.linalg.norm(a - b) / scale)


@pytest.mark.parametrize("use_pos", [False, True])
def test_analytic_gradients_match_finite_differences(simple, use_pos):
    model = _tiny_model(use_pos)
    inp = encode_sentence(model, simple)
    _, grads = loss_and_gradients(model, inp)

    h = 1e-5
    for name, block in model.params.items():
        numeric = np.zeros_like(block)
        for index in np.ndindex(block.shape):
            saved = block[index]
            block[index] = saved + h
            up, _ = loss_and_gradients(model, inp)
            block[index] = saved - h
            down, _ = loss_and_gradients(model, inp)
            block[index] = saved
            numeric[index] = (up - down) / (2 * h)
        assert _relative_error(grads[name], numeric) < 1e-4, name


def test_unscored_tokens_carry_no_loss(simple):
    model = _tiny_model(False)
    inp = encode_sentence(model, simple)
    masked = type(inp)(inp.word_ids, inp.pos_ids, np.full_like(inp.heads, -1), np.full_like(inp.labels, -1))
    loss, grads = loss_and_gradients(model, masked)
    assert loss == 0.0
    assert all(not g.any() for g in grads.values())


def test_untrained_model_has_uniform_heads(simple):
    config = ParserConfig(embed_dim=4, hidden_size=3, layers=1, arc_dim=5, label_dim=3)
    table = EmbeddingTable.random(simple.forms, 4, np.random.default_rng(0))
    model = init_model(config, LABELS, table)
    arc_loss, label_loss, count = sentence_loss(model, encode_sentence(model, simple))
    n = len(simple)
    assert count == n
    assert arc_loss / n == pytest.approx(math.log(n), rel=1e-5)
    assert label_loss / n == pytest.approx(math.log(len(LABELS)), rel=1e-5)


def test_score_sentence_shapes(simple):
    model = _tiny_model(True)
    arcs, labels = score_sentence(model, simple)
    n = len(simple)
    assert arcs.shape == (n + 1, n)
    assert labels.shape == (n + 1, n, len(LABELS))
    assert np.isneginf(arcs[np.arange(1, n + 1), np.arange(n)]).all()
    assert np.isfinite(arcs[0]).all()
    heads = decode_mst(arcs)
    assert (heads == 0).sum() == 1


def test_relative_error_ignores_rounding_noise():
    assert _relative_error(np.array([-5.55e-17, -5.55e-17, 0.0]), np.zeros(3)) == 0.0
    assert _relative_error(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 0.0
    assert _relative_error(np.array([1e-3]), np.zeros(1)) == pytest.approx(1.0)
