import pytest

from treebank import map_sentences, split_corpus, synthesize_treebank, write_conllu
from validator import validate_corpus


def test_synthetic_treebank_is_deterministic_and_valid(tagset):
    corpus = synthesize_treebank(200, seed=5)
    assert write_conllu(corpus) == write_conllu(synthesize_treebank(200, seed=5))
    assert write_conllu(corpus) != write_conllu(synthesize_treebank(200, seed=6))
    assert validate_corpus(corpus, tagset).errors == []
    assert [s.sent_id for s in corpus[:2]] == ["synth-1", "synth-2"]


def test_synthetic_prefix_and_text():
    [sentence] = synthesize_treebank(1, prefix="clean")
    assert sentence.sent_id == "clean-1"
    assert sentence.raw_text == " ".join(sentence.forms)


def test_split_keeps_order_and_is_seeded():
    corpus = synthesize_treebank(30, seed=1)
    train, test = split_corpus(corpus, 10, seed=3)
    assert (len(train), len(test)) == (20, 10)
    assert sorted(train + test, key=corpus.index) == corpus
    assert train == [s for s in corpus if s in train]
    assert split_corpus(corpus, 10, seed=3) == (train, test)
    assert split_corpus(corpus, 10, seed=4) != (train, test)


@pytest.mark.parametrize("size", [-1, 31])
def test_split_size_out_of_range(size):
    with pytest.raises(ValueError, match="out of range"):
        split_corpus(synthesize_treebank(30, seed=1), size)


def test_map_sentences_keeps_order():
    items = list(range(50))
    assert map_sentences(abs, items, jobs=3) == items
    assert map_sentences(abs, items) == items
