import math

import numpy as np
import pytest

from augment import AugmentConfig, augment_corpus
from augment.corpus import TRANSFORMS
from biaffine import (
    CompatibilityError, EmbeddingTable, ParserConfig, TrainingError, evaluate, finetune, init_model, parse, train,
)
from biaffine.trainer import (
    TRAINING_LOG_HEADER, Adam, EpochRecord, _stabilized, clip_gradients, format_training_log, write_training_log,
)
from treebank import ROOT, split_corpus, synthesize_treebank
from validator import validate_sentence
from conftest import make_sentence

TINY = ParserConfig(
    embed_dim=8, hidden_size=8, layers=1, arc_dim=8, label_dim=6,
    dropout=0.0, word_dropout=0.0, batch_size=8, max_epochs=2, patience=5, seed=3,
)


@pytest.fixture(scope="module")
def corpus():
    return synthesize_treebank(24, seed=4)


@pytest.fixture(scope="module")
def trained(corpus):
    return train(corpus[:20], corpus[20:], None, TINY)


# --- optimizer pieces -----------------------------------------------------

def test_clip_gradients_scales_globally():
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    assert clip_gradients(grads, 1.0) == pytest.approx(5.0)
    assert grads["a"][0] == pytest.approx(0.6)
    assert grads["b"][0] == pytest.approx(0.8)

    small = {"a": np.array([0.1])}
    clip_gradients(small, 1.0)
    assert small["a"][0] == 0.1


def test_adam_moves_against_the_gradient():
    params = {"w": np.array([1.0, -1.0])}
    optimizer = Adam(params, lr=0.1, beta1=0.9, beta2=0.9)
    optimizer.step(params, {"w": np.array([2.0, -0.5])})
    # the first bias-corrected step has size lr whatever the gradient scale
    assert params["w"] == pytest.approx([0.9, -0.9])


@pytest.mark.parametrize("losses, epsilon, expected", [
    ([1.0], math.inf, True),
    ([1.0, 1.0, 1.0], 0.01, False),
    ([1.0, 1.0, 1.0, 1.0], 0.01, True),
    ([2.0, 1.0, 1.0, 1.0], 0.01, False),
    ([2.0, 1.0, 1.0, 1.0, 1.0], 0.01, True),
    ([1.0, 1.0, 1.0, 2.0], 0.01, False),
    ([1.0, 0.9, 0.81, 0.729], 0.2, True),
    ([1.0, 0.9, 0.81, 0.729], 0.05, False),
])
def test_stabilization_rule(losses, epsilon, expected):
    assert _stabilized(losses, epsilon) is expected


# --- training -------------------------------------------------------------

def test_training_produces_a_log(trained):
    assert 1 <= trained.best_epoch <= TINY.max_epochs
    assert [r.epoch for r in trained.log] == list(range(1, len(trained.log) + 1))
    assert trained.final.las <= trained.final.uas
    text = format_training_log(trained.log).splitlines()
    assert text[0] == TRAINING_LOG_HEADER
    assert len(text[1].split("\t")) == 5


def test_best_model_is_the_one_reported(trained, corpus):
    metrics = evaluate(trained.model, corpus[20:])
    assert metrics.las == pytest.approx(trained.final.las)
    assert trained.final.las >= trained.log[-1].dev_las


def test_training_is_reproducible(corpus, trained):
    again = train(corpus[:20], corpus[20:], None, TINY)
    for name, block in trained.model.params.items():
        assert np.array_equal(again.model.params[name], block)


def test_training_inputs_are_checked(corpus):
    with pytest.raises(TrainingError, match="empty"):
        train([], corpus, None, TINY)
    with pytest.raises(TrainingError, match="dev"):
        train(corpus, [], None, TINY)
    odd = make_sentence([(1, "go", "VERB", 0, "root"), (2, "now", "ADV", 1, "temporal")])
    with pytest.raises(TrainingError, match="temporal"):
        train([odd], corpus, None, TINY)


def test_pretrained_embeddings_can_be_frozen(corpus):
    forms = (tok.form for s in corpus for tok in s.surface_tokens)
    table = EmbeddingTable.random(forms, TINY.embed_dim, np.random.default_rng(0))
    config = TINY.with_overrides(freeze_embeddings=True, max_epochs=1)
    result = train(corpus[:20], corpus[20:], table, config)
    assert np.array_equal(result.model.params["embed"][2:], table.matrix[2:])


def test_write_training_log(tmp_path):
    path = write_training_log([EpochRecord(1, 2.5, 2.25, 50.0, 40.0)], tmp_path / "log.tsv")
    assert path.read_text(encoding="utf-8") == f"{TRAINING_LOG_HEADER}\n1\t2.500000\t2.250000\t50.00\t40.00\n"


# --- fine-tuning ------------------------------------------------------------

def test_infinite_epsilon_returns_the_checkpoint(trained, corpus):
    result = finetune(trained.model, corpus[:10], corpus[20:], TINY.with_overrides(finetune_epsilon=math.inf))
    assert result.log == [] and result.best_epoch == 0
    assert result.initial == result.final
    for name, block in trained.model.params.items():
        assert np.array_equal(result.model.params[name], block)


def test_self_finetune_does_not_degrade(trained, corpus):
    result = finetune(trained.model, corpus[:20], corpus[20:])
    assert result.final.las >= result.initial.las - 0.5


def test_finetune_leaves_the_checkpoint_alone(trained, corpus):
    before = {k: v.copy() for k, v in trained.model.params.items()}
    finetune(trained.model, corpus[:10], corpus[20:], TINY.with_overrides(max_epochs=1))
    assert all(np.array_equal(before[k], trained.model.params[k]) for k in before)


def test_incompatible_config(trained, corpus):
    with pytest.raises(CompatibilityError) as excinfo:
        finetune(trained.model, corpus, corpus, TINY.with_overrides(hidden_size=16))
    assert excinfo.value.component == "hidden_size"


def test_unknown_label_for_checkpoint(corpus):
    table = EmbeddingTable.random(["go", "now"], TINY.embed_dim, np.random.default_rng(0))
    model = init_model(TINY, ("root", "advmod"), table)
    sentence = make_sentence([(1, "go", "VERB", 0, "root"), (2, "now", "ADV", 1, "discourse")])
    with pytest.raises(CompatibilityError) as excinfo:
        finetune(model, [sentence], [sentence])
    assert excinfo.value.component == "label vocabulary"


# --- inference ------------------------------------------------------------

def test_parse_attaches_every_token_once(trained, corpus):
    for sentence in parse(trained.model, corpus):
        assert all(tok.is_attached for tok in sentence.tokens)
        roots = [tok for tok in sentence.tokens if tok.head == ROOT]
        assert len(roots) == 1 and roots[0].deprel == "root"
        assert sentence.forms == next(s for s in corpus if s.sent_id == sentence.sent_id).forms


def test_parse_passes_empty_nodes_through(trained, dogs):
    [parsed] = parse(trained.model, [dogs])
    assert parsed.empty_nodes == dogs.empty_nodes
    assert parsed.comments == dogs.comments
    assert parse(trained.model, [dogs]) == [parsed]


def test_parse_moves_a_rooted_empty_node_under_the_predicted_root(trained, tagset):
    sentence = make_sentence([
        ("0.1", "E1.1", "PRON", 0, "root"),
        (1, "really", "ADV", "0.1", "preterm"),
        (2, "like", "VERB", "0.1", "preterm"),
    ])
    [parsed] = parse(trained.model, [sentence])
    [root] = [tok for tok in parsed.tokens if tok.head == ROOT]
    assert not root.is_empty
    empty = parsed.empty_nodes[0]
    assert (empty.head, empty.deprel) == (root.id, "preterm")
    assert [v.rule for v in validate_sentence(parsed, tagset).errors if v.rule in ("R1", "R2", "R3")] == []


# --- longer runs ------------------------------------------------------------

@pytest.mark.slow
def test_overfits_a_small_treebank():
    corpus = synthesize_treebank(100, seed=12)
    config = ParserConfig(
        embed_dim=32, hidden_size=48, layers=2, arc_dim=64, label_dim=32,
        dropout=0.0, word_dropout=0.0, batch_size=10, max_epochs=200, patience=20, seed=1,
    )
    result = train(corpus, corpus, None, config)
    assert evaluate(result.model, corpus).uas >= 98.0


@pytest.mark.slow
def test_pretraining_then_finetuning_beats_in_domain_only():
    clean = synthesize_treebank(2000, seed=1)
    rates = {name: 0.3 for name in TRANSFORMS}
    augmented = augment_corpus(synthesize_treebank(1500, seed=2, prefix="dialog"), AugmentConfig(seed=7, **rates))
    in_domain, test = split_corpus(augmented, 500, seed=5)
    dev = augment_corpus(synthesize_treebank(150, seed=3, prefix="dev"), AugmentConfig(seed=8, **rates))

    config = ParserConfig(
        embed_dim=32, hidden_size=32, layers=1, arc_dim=64, label_dim=32,
        batch_size=32, max_epochs=8, patience=3, seed=6,
    )
    pretrained = train(clean, synthesize_treebank(150, seed=9, prefix="clean-dev"), None, config)
    tuned = finetune(pretrained.model, in_domain, dev, config)
    scratch = train(in_domain, dev, None, config)

    assert evaluate(tuned.model, test).las > evaluate(scratch.model, test).las


def test_parser_config_file_precedence(tmp_path):
    path = tmp_path / "parser.cfg"
    path.write_text("hidden_size = 16\n", encoding="utf-8")
    assert ParserConfig.from_file(path, fallback={"seed": 11}).seed == 11
    assert ParserConfig.from_file(path, fallback={"seed": 11}, seed=7).seed == 7
    path.write_text("hidden_size = 16\nseed = 5\n", encoding="utf-8")
    assert ParserConfig.from_file(path, fallback={"seed": 11}).seed == 5
