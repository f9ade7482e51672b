import pytest

from treebank import (
    DEFAULT_TAGSET_PATH, DepToken, NodeId, ROOT, RelationTag, TagsetError, load_tagset,
    parse_tagset, primary_relation,
)
from conftest import make_sentence


def test_node_id_parsing_and_order():
    assert NodeId.parse("3") == NodeId(3, 0)
    assert NodeId.parse("1.2") == NodeId(1, 2)
    assert NodeId(1, 1) < NodeId(2) < NodeId(2, 1) < NodeId(3)
    assert NodeId(1, 1).is_empty and not NodeId(1).is_empty
    assert str(NodeId(4, 2)) == "4.2"
    for bad in ("", "a", "1.", "1.0", "-1", "1-2"):
        with pytest.raises(ValueError):
            NodeId.parse(bad)


def test_relation_tags():
    assert primary_relation("flat:foreign") == "flat"
    assert primary_relation("preterm") == "preterm"
    tag = RelationTag.parse("nmod:poss")
    assert (tag.name, tag.subtype) == ("nmod", "poss")
    assert str(tag) == "nmod:poss"
    assert RelationTag.parse("obj").subtype is None


def test_token_invariants():
    with pytest.raises(ValueError, match="heads itself"):
        DepToken(NodeId(2), "x", head=NodeId(2), deprel="dep")
    with pytest.raises(ValueError, match="both"):
        DepToken(NodeId(1), "x", head=ROOT)
    with pytest.raises(ValueError, match="empty form"):
        DepToken(NodeId(1), "")
    with pytest.raises(ValueError, match="tab"):
        DepToken(NodeId(1), "a\tb")
    assert DepToken(NodeId(1), "x", head=ROOT, deprel="flat:name").primary == "flat"


def test_sentence_lookups(dogs):
    assert len(dogs) == 3
    assert [t.form for t in dogs.dependents(NodeId(1))] == ["E1.1", "dogs"]
    assert [t.form for t in dogs.root_tokens()] == ["got"]
    assert dogs.token(NodeId(0, 1)).upos == "PRON"
    assert dogs.invariant_problems() == []


def test_with_comment_replaces_existing(simple):
    updated = simple.with_comment("text", "changed").with_comment("augmented", "stutter")
    assert updated.raw_text == "changed"
    assert updated.comment_value("augmented") == "stutter"
    assert sum(line.startswith("# text =") for line in updated.comments) == 1
    assert simple.raw_text == "I like the big dog"


def test_cycles_listed_once():
    sentence = make_sentence([
        (1, "a", "X", 3, "dep"),
        (2, "b", "X", 0, "root"),
        (3, "c", "X", 1, "dep"),
    ])
    assert sentence.cycles() == [(NodeId(1), NodeId(3))]
    assert any("cycle" in p for p in sentence.invariant_problems())


def test_bundled_tagset():
    tags = load_tagset()
    assert "preterm" in tags and "reparandum" in tags and "goeswith" in tags
    assert len(tags) == len(set(tags)) == 38
    assert load_tagset(DEFAULT_TAGSET_PATH) == tags


def test_tagset_parsing():
    assert parse_tagset("# comment\nroot\n\nnsubj  # subject\npreterm\n") == ("root", "nsubj", "preterm")
    with pytest.raises(TagsetError):
        parse_tagset("root\npreterm\nNot-A-Tag\n")
    with pytest.raises(TagsetError, match="preterm"):
        parse_tagset("root\nnsubj\n")
    with pytest.raises(TagsetError):
        load_tagset("/nonexistent/scud.tagset")
