"""SCUD treebank model and CoNLL-U input/output."""
from .model import (
    ROOT, UPOS_TAGS, AnnotatedSentence, DepToken, NodeId, RelationTag,
    edge_multiset, materialize_empty_nodes, primary_relation,
)
from .conllu import ConlluError, parse_conllu, write_conllu, read_conllu, read_corpora, save_conllu
from .tagset import DEFAULT_TAGSET_PATH, TagsetError, load_tagset, parse_tagset
from .corpus import map_sentences, split_corpus
from .synthetic import synthesize_treebank
from .render import render_svg, render_text

__all__ = [
    "ROOT", "UPOS_TAGS", "AnnotatedSentence", "DepToken", "NodeId", "RelationTag",
    "edge_multiset", "materialize_empty_nodes", "primary_relation",
    "ConlluError", "parse_conllu", "write_conllu", "read_conllu", "read_corpora", "save_conllu",
    "DEFAULT_TAGSET_PATH", "TagsetError", "load_tagset", "parse_tagset",
    "map_sentences", "split_corpus", "synthesize_treebank", "render_svg", "render_text",
]
