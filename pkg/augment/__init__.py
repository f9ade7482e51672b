"""Synthetic ASR noise and speech phenomena for clean treebanks."""
from .corpus import AugmentConfig, AugmentConfigError, augment_corpus, augment_sentence, augment_with_counts
from .transforms import (
    TransformError, add_filler, add_self_correction, add_stutter, drop_token_insert_empty,
    merge_goeswith, remove_filler, remove_reparandum, remove_stutter, restore_dropped,
    split_word, truncate_preterm,
)

__all__ = [
    "AugmentConfig", "AugmentConfigError", "augment_corpus", "augment_sentence", "augment_with_counts",
    "TransformError", "add_filler", "add_self_correction", "add_stutter", "drop_token_insert_empty",
    "merge_goeswith", "remove_filler", "remove_reparandum", "remove_stutter", "restore_dropped",
    "split_word", "truncate_preterm",
]
