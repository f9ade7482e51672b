import time
from collections import Counter

import pytest
from hypothesis import assume, given, settings
import hypothesis.strategies as st

from augment import (
    AugmentConfig, AugmentConfigError, TransformError, add_filler, add_self_correction, add_stutter,
    augment_corpus, augment_sentence, augment_with_counts, drop_token_insert_empty, merge_goeswith,
    remove_filler, remove_reparandum, remove_stutter, restore_dropped, split_word, truncate_preterm,
)
from augment.corpus import TRANSFORMS, sentence_rng
from augment.transforms import droppable_positions
from treebank import NodeId, ROOT, synthesize_treebank, write_conllu
from validator import validate_corpus, validate_sentence
from conftest import make_sentence

RATES = {name: 0.3 for name in TRANSFORMS}


def _layout(sentence):
    return [(str(t.id), t.form, t.upos, None if t.head is None else str(t.head), t.deprel) for t in sentence.tokens]


@pytest.fixture
def got_dogs():
    return make_sentence([
        (1, "I", "PRON", 2, "nsubj"),
        (2, "got", "VERB", 0, "root"),
        (3, "two", "NUM", 4, "nummod"),
        (4, "dogs", "NOUN", 2, "obj"),
    ], text="I got two dogs")


# --- omitted words ------------------------------------------------------

def test_dropped_subject_becomes_empty_node(got_dogs, dogs):
    dropped = drop_token_insert_empty(got_dogs, 1)
    assert _layout(dropped) == _layout(dogs)
    assert dropped.empty_nodes[0].misc == "Dropped=I"
    assert dropped.raw_text == "got two dogs"
    assert restore_dropped(dropped) == got_dogs


def test_droppable_positions(simple):
    # "dog" heads "the" and "big", "like" is the root
    assert droppable_positions(simple) == [1, 3]
    with pytest.raises(TransformError, match="dependents"):
        drop_token_insert_empty(simple, 5)
    with pytest.raises(TransformError, match="not droppable"):
        drop_token_insert_empty(simple, 2)
    with pytest.raises(TransformError, match="out of range"):
        drop_token_insert_empty(simple, 9)


def test_second_drop_next_to_empty_node(simple):
    once = drop_token_insert_empty(simple, 3)
    twice = drop_token_insert_empty(once, 1)
    assert [str(t.id) for t in twice.tokens] == ["0.1", "1", "1.1", "2", "3"]
    assert twice.forms == ["like", "big", "dog"]
    assert restore_dropped(twice) == simple


def test_placeholder_names_the_original_position():
    sentence = make_sentence([
        (1, "the", "DET", 4, "det"),
        (2, "a", "DET", 4, "det"),
        (3, "the", "DET", 4, "det"),
        (4, "dog", "NOUN", 0, "root"),
    ])
    once = drop_token_insert_empty(sentence, 2)
    twice = drop_token_insert_empty(once, 2)
    assert [(str(t.id), t.form) for t in twice.empty_nodes] == [("1.1", "E2.1"), ("1.2", "E3.2")]
    assert restore_dropped(twice) == sentence


# --- word splits ----------------------------------------------------------

def test_split_and_merge(simple):
    split = split_word(simple, 2, 2)
    assert split.forms == ["I", "li", "ke", "the", "big", "dog"]
    part = split.token(NodeId(3))
    assert (part.upos, part.head, part.deprel) == ("X", NodeId(2), "goeswith")
    assert split.token(NodeId(6)).head == NodeId(2)
    assert validate_sentence(split, ["nsubj", "root", "det", "amod", "obj", "goeswith"]).passed
    assert merge_goeswith(split) == simple


def test_split_errors(simple):
    with pytest.raises(TransformError, match="too short"):
        split_word(simple, 1, 1)
    with pytest.raises(TransformError, match="split point"):
        split_word(simple, 5, 3)


# --- premature termination -----------------------------------------------

def test_truncation_reattaches_orphans(simple):
    cut = truncate_preterm(simple, 3)
    assert _layout(cut) == [
        ("1", "I", "PRON", "2", "nsubj"),
        ("2", "like", "VERB", "0", "root"),
        ("3", "the", "DET", "2", "preterm"),
    ]
    assert cut.raw_text == "I like the"


def test_truncation_before_the_root(simple):
    cut = truncate_preterm(simple, 1)
    assert _layout(cut) == [("1", "I", "PRON", "0", "root")]
    with pytest.raises(TransformError):
        truncate_preterm(simple, 5)


def test_truncation_promotes_leftmost_orphan():
    sentence = make_sentence([
        (1, "the", "DET", 3, "det"),
        (2, "red", "ADJ", 3, "amod"),
        (3, "car", "NOUN", 4, "nsubj"),
        (4, "stopped", "VERB", 0, "root"),
    ])
    cut = truncate_preterm(sentence, 2)
    assert _layout(cut) == [("1", "the", "DET", "0", "root"), ("2", "red", "ADJ", "1", "preterm")]


def test_truncation_never_promotes_an_empty_node(tagset):
    sentence = make_sentence([
        (1, "I", "PRON", 3, "nsubj"),
        (2, "really", "ADV", 3, "advmod"),
        (3, "like", "VERB", 0, "root"),
        (4, "dogs", "NOUN", 3, "obj"),
    ], text="I really like dogs")
    cut = truncate_preterm(drop_token_insert_empty(sentence, 1), 1)
    assert _layout(cut) == [
        ("0.1", "E1.1", "PRON", "1", "preterm"),
        ("1", "really", "ADV", "0", "root"),
    ]
    assert validate_sentence(cut, tagset).errors == []


def test_truncation_below_an_orphaned_empty_node(tagset):
    sentence = make_sentence([
        ("0.1", "E1.1", "PRON", 2, "nsubj"),
        (1, "very", "ADV", "0.1", "advmod"),
        (2, "tired", "ADJ", 0, "root"),
    ])
    cut = truncate_preterm(sentence, 1)
    assert _layout(cut) == [
        ("0.1", "E1.1", "PRON", "1", "preterm"),
        ("1", "very", "ADV", "0", "root"),
    ]
    assert validate_sentence(cut, tagset).errors == []


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), data=st.data())
def test_truncation_keeps_prefix_and_surviving_edges(seed, data, tagset):
    [sentence] = synthesize_treebank(1, seed=seed)
    assume(len(sentence) >= 2)
    cut = data.draw(st.integers(1, len(sentence) - 1))
    result = truncate_preterm(sentence, cut)
    assert result.forms == sentence.forms[:cut]
    for old, new in zip(sentence.tokens, result.tokens):
        if old.head is None or old.head == ROOT or old.head.major <= cut:
            assert (new.head, new.deprel) == (old.head, old.deprel)
        elif new.head != ROOT:
            assert new.deprel == "preterm"
    assert validate_sentence(result, tagset).errors == []


# --- stutters, self-corrections, fillers ---------------------------------

def test_stutter_round_trip(simple):
    stuttered = add_stutter(simple, 1, repeats=2)
    assert stuttered.forms == ["I", "I", "I", "like", "the", "big", "dog"]
    assert [(t.head, t.deprel) for t in stuttered.tokens[1:3]] == [(NodeId(1), "flat")] * 2
    assert stuttered.token(NodeId(1)).head == NodeId(4)
    assert remove_stutter(stuttered, 1) == simple
    with pytest.raises(TransformError):
        add_stutter(simple, 1, repeats=0)


def test_self_correction_round_trip(simple):
    corrected = add_self_correction(simple, 5, "cat")
    assert corrected.forms == ["I", "like", "the", "big", "cat", "dog"]
    assert (corrected.token(NodeId(5)).head, corrected.token(NodeId(5)).deprel) == (NodeId(6), "reparandum")
    assert corrected.token(NodeId(3)).head == NodeId(6)
    assert remove_reparandum(corrected) == simple

    repeated = add_self_correction(simple, 2)
    assert repeated.forms[:3] == ["I", "like", "like"]
    with pytest.raises(TransformError, match="content"):
        add_self_correction(simple, 3)


def test_multiword_filler_round_trip(simple):
    padded = add_filler(simple, 1, "you know")
    assert padded.forms[:3] == ["you", "know", "I"]
    assert _layout(padded)[:2] == [
        ("1", "you", "INTJ", "4", "discourse"),
        ("2", "know", "INTJ", "1", "fixed"),
    ]
    assert remove_filler(padded, 1, "you know") == simple


def test_filler_positions(simple):
    assert add_filler(simple, 3, "like").token(NodeId(3)).upos == "ADV"
    assert add_filler(simple, 6, "um").forms[-1] == "um"
    with pytest.raises(TransformError):
        add_filler(simple, 7, "um")
    with pytest.raises(TransformError, match="no filler"):
        remove_filler(simple, 1, "um")


def test_insertions_drop_range_lines(sample):
    contraction = sample[-1]
    assert contraction.passthrough_ranges
    assert add_stutter(contraction, 3).passthrough_ranges == ()


# --- corpus augmentation -----------------------------------------------

def test_augmented_corpus_is_valid_and_reproducible(tagset):
    corpus = synthesize_treebank(1000, seed=11)
    config = AugmentConfig(seed=7, **RATES)
    started = time.perf_counter()
    augmented = augment_corpus(corpus, config)
    elapsed = time.perf_counter() - started

    report = validate_corpus(augmented, tagset)
    assert report.errors == [], report.to_text()[:2000]
    assert write_conllu(augment_corpus(corpus, config)) == write_conllu(augmented)
    assert sum(s.comment_value("augmented") is not None for s in augmented) > 500
    assert elapsed < 60


def test_parallel_augmentation_matches_serial():
    corpus = synthesize_treebank(60, seed=5)
    config = AugmentConfig(seed=3, **RATES)
    assert augment_corpus(corpus, config, jobs=3) == augment_corpus(corpus, config)


def test_seed_changes_output():
    corpus = synthesize_treebank(50, seed=5)
    first = augment_corpus(corpus, AugmentConfig(seed=1, **RATES))
    second = augment_corpus(corpus, AugmentConfig(seed=2, **RATES))
    assert first != second


def test_zero_rates_are_identity(sample):
    config = AugmentConfig(**{name: 0.0 for name in TRANSFORMS})
    assert augment_corpus(sample, config) == sample


def test_applied_transforms_are_recorded(simple):
    config = AugmentConfig(**{name: 1.0 for name in TRANSFORMS})
    result, applied = augment_sentence(simple, config, sentence_rng(42, 0))
    assert applied == [name for name in TRANSFORMS if name in applied]
    assert "preterm_truncate" in applied and "stutter" in applied
    assert result.comment_value("augmented") == ",".join(applied)


def test_counts_match_comments():
    corpus = synthesize_treebank(80, seed=8)
    sentences, counts = augment_with_counts(corpus, AugmentConfig(seed=4, **RATES))
    from_comments = Counter(
        name for s in sentences for name in (s.comment_value("augmented") or "").split(",") if name
    )
    assert counts == from_comments


def test_sentence_streams_are_independent():
    a = sentence_rng(42, 3).random(4)
    assert (a == sentence_rng(42, 3).random(4)).all()
    assert not (a == sentence_rng(42, 4).random(4)).all()
    assert not (a == sentence_rng(43, 3).random(4)).all()


# --- configuration --------------------------------------------------------

def test_config_file(tmp_path):
    lexicon = tmp_path / "fillers.txt"
    lexicon.write_text("# spoken fillers\nuh\nyou know\n", encoding="utf-8")
    path = tmp_path / "augment.cfg"
    path.write_text("SEED = 9\nstutter = 0.5\nfiller_lexicon = fillers.txt\n", encoding="utf-8")

    config = AugmentConfig.from_file(path)
    assert (config.seed, config.stutter, config.fillers) == (9, 0.5, ("uh", "you know"))
    assert config.word_drop == AugmentConfig().word_drop
    assert AugmentConfig.from_file(path, seed=3).seed == 3
    assert AugmentConfig.from_file(path, default_seed=4).seed == 9

    unseeded = tmp_path / "unseeded.cfg"
    unseeded.write_text("stutter = 0.5\n", encoding="utf-8")
    assert AugmentConfig.from_file(unseeded, default_seed=4).seed == 4
    assert AugmentConfig.from_file(unseeded, seed=3, default_seed=4).seed == 3


def test_config_inline_fillers(tmp_path):
    path = tmp_path / "augment.cfg"
    path.write_text("fillers = um, i mean\n", encoding="utf-8")
    assert AugmentConfig.from_file(path).fillers == ("um", "i mean")


@pytest.mark.parametrize("text, fragment", [
    ("stutter = 1.5\n", "stutter rate"),
    ("colour = blue\n", "unknown keys"),
    ("seed = -1\n", "seed"),
    ("filler = 0.2\nfillers = ,\n", "filler lexicon is empty"),
    ("stutter = lots\n", "lots"),
])
def test_bad_config(tmp_path, text, fragment):
    path = tmp_path / "augment.cfg"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(AugmentConfigError, match=fragment):
        AugmentConfig.from_file(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        AugmentConfig.from_file(tmp_path / "nope.cfg")
