from pathlib import Path

import pytest

from treebank import AnnotatedSentence, DepToken, NodeId, load_tagset, read_conllu

DATA_DIR = Path(__file__).resolve().parent.parent / "treebank" / "data"
SAMPLE_PATH = DATA_DIR / "sample.conllu"


def make_sentence(rows, sent_id="t-1", text=None, partial=False):
    """
    Build a sentence from (id, form, upos, head, deprel) rows; ids and heads
    are "3" / "1.1" strings or ints, head None for unattached tokens.
    """
    def node(value):
        if value is None:
            return None
        return NodeId.parse(str(value))

    tokens = [
        DepToken(node(i), form, upos, node(head), deprel)
        for i, form, upos, head, deprel in rows
    ]
    comments = [f"# sent_id = {sent_id}"]
    if text is not None:
        comments.append(f"# text = {text}")
    if partial:
        comments.append("# partial = yes")
    return AnnotatedSentence(tuple(tokens), tuple(comments))


@pytest.fixture
def sample_path():
    return SAMPLE_PATH


@pytest.fixture
def sample():
    return read_conllu(SAMPLE_PATH)


@pytest.fixture(scope="session")
def tagset():
    return load_tagset()


@pytest.fixture
def dogs():
    """The dropped-subject example: "got two dogs" with an empty node for "I"."""
    return make_sentence([
        ("0.1", "E1.1", "PRON", 1, "nsubj"),
        (1, "got", "VERB", 0, "root"),
        (2, "two", "NUM", 3, "nummod"),
        (3, "dogs", "NOUN", 1, "obj"),
    ], text="got two dogs")


@pytest.fixture
def simple():
    """I like the big dog"""
    return make_sentence([
        (1, "I", "PRON", 2, "nsubj"),
        (2, "like", "VERB", 0, "root"),
        (3, "the", "DET", 5, "det"),
        (4, "big", "ADJ", 5, "amod"),
        (5, "dog", "NOUN", 2, "obj"),
    ], text="I like the big dog")

