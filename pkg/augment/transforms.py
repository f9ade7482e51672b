"""
ASR Noise Transformations

Each transformation injects one speech or transcription phenomenon into a
clean sentence and annotates it the SCUD way, so the result stays a valid
tree. Every insertion has an inverse that removes what it added.

Positions (`idx`, `position`, `cut`) are 1-based surface positions.
"""
from dataclasses import replace
from typing import Iterable, Sequence

from treebank.model import ROOT, TEXT_KEY, AnnotatedSentence, DepToken, NodeId

# Relations a token may carry and still be dropped in favour of an empty node
DROPPABLE = frozenset({"nsubj", "obj", "aux", "cop", "case", "det"})
CONTENT_UPOS = frozenset({"NOUN", "PROPN", "VERB", "ADJ", "ADV", "PRON", "NUM"})
DEFAULT_FILLERS = ("like", "you know", "well", "so", "uh", "um")

DROPPED_KEY = "Dropped"


class TransformError(ValueError):
    """A transformation was asked to do something it cannot do to this sentence."""


# --- shared plumbing ----------------------------------------------------

def _fresh(n: int, empty: bool = False) -> NodeId:
    """Temporary id for a token that gets its real id from _renumber."""
    return NodeId(-n, 1 if empty else 0)


def _renumber(sentence: AnnotatedSentence, ordered: Sequence[DepToken]) -> AnnotatedSentence:
    """
    Assign final ids to tokens given in linear order and remap heads.

    Surface tokens become 1..n; empty nodes take the major of the preceding
    surface token and count up from minor 1. Multiword range lines no longer
    line up with the new tokens and are dropped.
    """
    mapping = {ROOT: ROOT}
    major = minor = 0
    for tok in ordered:
        if tok.is_empty:
            minor += 1
            mapping[tok.id] = NodeId(major, minor)
        else:
            major += 1
            minor = 0
            mapping[tok.id] = NodeId(major)

    tokens = [
        replace(tok, id=mapping[tok.id], head=mapping[tok.head] if tok.head is not None else None)
        for tok in ordered
    ]
    result = sentence.with_tokens(tokens, passthrough_ranges=())
    if result.comment_value(TEXT_KEY) is not None:
        result = result.with_comment(TEXT_KEY, " ".join(result.forms))
    return result


def _surface(sentence: AnnotatedSentence, idx: int) -> DepToken:
    if not 1 <= idx <= len(sentence):
        raise TransformError(f"position {idx} out of range 1..{len(sentence)}")
    return sentence.token(NodeId(idx))


def _insert_after(tokens: Sequence[DepToken], anchor: NodeId, new: Iterable[DepToken]) -> list[DepToken]:
    out = []
    for tok in tokens:
        out.append(tok)
        if tok.id == anchor:
            out.extend(new)
    return out


def _insert_before(tokens: Sequence[DepToken], anchor: NodeId, new: Iterable[DepToken]) -> list[DepToken]:
    out = []
    for tok in tokens:
        if tok.id == anchor:
            out.extend(new)
        out.append(tok)
    return out


def _root_token(sentence: AnnotatedSentence) -> DepToken:
    roots = sentence.root_tokens()
    if not roots:
        raise TransformError("sentence has no root")
    return roots[0]


def _misc_get(misc: str, key: str) -> str | None:
    if misc == "_":
        return None
    for item in misc.split("|"):
        name, eq, value = item.partition("=")
        if eq and name == key:
            return value
    return None


def _misc_add(misc: str, key: str, value: str) -> str:
    item = f"{key}={value}"
    return item if misc == "_" else f"{misc}|{item}"


def _misc_remove(misc: str, key: str) -> str:
    kept = [item for item in misc.split("|") if not item.startswith(f"{key}=")]
    return "|".join(kept) or "_"


# --- word split (goeswith) ----------------------------------------------

def split_word(sentence: AnnotatedSentence, idx: int, split_point: int) -> AnnotatedSentence:
    """
    Split the token at `idx` after `split_point` characters, as an ASR system
    that broke one word in two.

    The first part keeps everything the token had; the second part follows it
    as POS X attached by goeswith.
    """
    tok = _surface(sentence, idx)
    if len(tok.form) < 2:
        raise TransformError(f"token {idx} ({tok.form!r}) is too short to split")
    if not 1 <= split_point < len(tok.form):
        raise TransformError(f"split point {split_point} out of range 1..{len(tok.form) - 1}")

    first = replace(tok, form=tok.form[:split_point])
    second = DepToken(_fresh(1), tok.form[split_point:], upos="X", head=tok.id, deprel="goeswith")
    tokens = [first if t.id == tok.id else t for t in sentence.tokens]
    return _renumber(sentence, _insert_after(tokens, tok.id, [second]))


def merge_goeswith(sentence: AnnotatedSentence) -> AnnotatedSentence:
    """Join every goeswith part onto its head's form and drop the part."""
    parts = {tok.id: tok for tok in sentence.tokens if tok.primary == "goeswith"}
    if not parts:
        return sentence

    def host(node: NodeId) -> NodeId:
        while node in parts:
            node = parts[node].head
        return node

    suffix: dict[NodeId, str] = {}
    for tok in sentence.tokens:
        if tok.id in parts:
            target = host(tok.id)
            suffix[target] = suffix.get(target, "") + tok.form

    ordered = []
    for tok in sentence.tokens:
        if tok.id in parts:
            continue
        head = host(tok.head) if tok.head in parts else tok.head
        ordered.append(replace(tok, form=tok.form + suffix.get(tok.id, ""), head=head))
    return _renumber(sentence, ordered)


# --- omitted word (empty node) ------------------------------------------

def droppable_positions(sentence: AnnotatedSentence) -> list[int]:
    if len(sentence) < 2:
        return []
    heads = {tok.head for tok in sentence.tokens}
    return [
        tok.id.major for tok in sentence.surface_tokens
        if tok.primary in DROPPABLE and tok.id not in heads and "|" not in tok.form
    ]


def drop_token_insert_empty(sentence: AnnotatedSentence, idx: int) -> AnnotatedSentence:
    """
    Replace the surface token at `idx` with an empty node standing where it was.

    The node is named E<position>.<minor>, where position counts earlier
    dropped words back in, so it is the word's place before any drop. It keeps
    the token's POS, head and relation; the dropped form is remembered in MISC
    for restore_dropped.
    """
    tok = _surface(sentence, idx)
    if tok.primary not in DROPPABLE:
        raise TransformError(f"token {idx} has relation {tok.deprel!r}, which is not droppable")
    if sentence.dependents(tok.id):
        raise TransformError(f"token {idx} has dependents and cannot be dropped")
    if len(sentence) < 2:
        raise TransformError("cannot drop the only surface token")
    if "|" in tok.form:
        raise TransformError(f"form {tok.form!r} cannot be recorded in MISC")

    minor = 1 + sum(1 for node in sentence.empty_nodes if node.id.major == idx - 1)
    position = idx + sum(
        1 for node in sentence.empty_nodes
        if node.id.major < idx and _misc_get(node.misc, DROPPED_KEY) is not None
    )
    empty = replace(
        tok,
        id=_fresh(1, empty=True),
        form=f"E{position}.{minor}",
        misc=_misc_add(tok.misc, DROPPED_KEY, tok.form),
    )
    return _renumber(sentence, [empty if t.id == tok.id else t for t in sentence.tokens])


def restore_dropped(sentence: AnnotatedSentence) -> AnnotatedSentence:
    """Turn every empty node made by drop_token_insert_empty back into its surface token."""
    remap = {
        tok.id: _fresh(n)
        for n, tok in enumerate(sentence.empty_nodes, start=1)
        if _misc_get(tok.misc, DROPPED_KEY) is not None
    }
    if not remap:
        return sentence

    ordered = []
    for tok in sentence.tokens:
        head = remap.get(tok.head, tok.head)
        if tok.id in remap:
            tok = replace(
                tok,
                id=remap[tok.id],
                form=_misc_get(tok.misc, DROPPED_KEY),
                misc=_misc_remove(tok.misc, DROPPED_KEY),
            )
        ordered.append(replace(tok, head=head))
    return _renumber(sentence, ordered)


# --- premature termination (preterm) ------------------------------------

def truncate_preterm(sentence: AnnotatedSentence, cut: int) -> AnnotatedSentence:
    """
    Keep the first `cut` surface tokens, as if the ASR system ended the turn there.

    Survivors whose head was cut away are reattached with preterm: to the
    surviving root, or, when the root itself was cut, to the leftmost surface
    orphan, which becomes the new root. Empty nodes are never promoted.
    """
    if not 1 <= cut < len(sentence):
        raise TransformError(f"cut {cut} out of range 1..{len(sentence) - 1}")

    survivors = [tok for tok in sentence.tokens if tok.id.major < cut or tok.id == NodeId(cut)]
    kept = {tok.id for tok in survivors}
    orphans = [tok.id for tok in survivors if tok.head is not None and tok.head != ROOT and tok.head not in kept]
    if not orphans:
        return _renumber(sentence, survivors)

    roots = [tok.id for tok in survivors if tok.head == ROOT and not tok.is_empty]
    if roots:
        new_root = None
        anchor = roots[0]
    else:
        # no surface orphan: the surface survivors all hang below orphaned empty nodes
        surface_orphans = [node for node in orphans if not node.is_empty]
        new_root = surface_orphans[0] if surface_orphans else next(t.id for t in survivors if not t.is_empty)
        anchor = new_root

    ordered = []
    for tok in survivors:
        if tok.id == new_root:
            tok = replace(tok, head=ROOT, deprel="root")
        elif tok.id in orphans or (tok.is_empty and tok.head == ROOT):
            tok = replace(tok, head=anchor, deprel="preterm")
        ordered.append(tok)
    return _renumber(sentence, ordered)


# --- stutter (flat) -----------------------------------------------------

def add_stutter(sentence: AnnotatedSentence, idx: int, repeats: int = 1) -> AnnotatedSentence:
    """Repeat the token at `idx` `repeats` times right after it, each copy attached by flat."""
    tok = _surface(sentence, idx)
    if repeats < 1:
        raise TransformError("repeats must be at least 1")
    copies = [
        DepToken(_fresh(n), tok.form, upos=tok.upos, head=tok.id, deprel="flat", lemma=tok.lemma)
        for n in range(1, repeats + 1)
    ]
    return _renumber(sentence, _insert_after(sentence.tokens, tok.id, copies))


def remove_stutter(sentence: AnnotatedSentence, idx: int) -> AnnotatedSentence:
    """Remove the flat-attached repetitions directly following the token at `idx`."""
    tok = _surface(sentence, idx)
    doomed = set()
    for follower in sentence.surface_tokens[idx:]:
        if follower.form != tok.form or follower.head != tok.id or follower.primary != "flat":
            break
        if sentence.dependents(follower.id):
            break
        doomed.add(follower.id)
    if not doomed:
        return sentence
    return _renumber(sentence, [t for t in sentence.tokens if t.id not in doomed])


# --- self-correction (reparandum) ---------------------------------------

def add_self_correction(
    sentence: AnnotatedSentence,
    idx: int,
    disfluent: str | Sequence[str] | None = None,
) -> AnnotatedSentence:
    """
    Insert abandoned material right before the repair token at `idx`.

    `disfluent` is the word or words the speaker started with ("you" before
    "my name"); by default the repair word itself is repeated. Each inserted
    word attaches to the repair with reparandum.
    """
    tok = _surface(sentence, idx)
    if tok.upos not in CONTENT_UPOS:
        raise TransformError(f"token {idx} ({tok.upos}) is not a content word")
    if disfluent is None:
        words = [tok.form]
    elif isinstance(disfluent, str):
        words = disfluent.split()
    else:
        words = list(disfluent)
    if not words:
        raise TransformError("disfluent span is empty")

    inserted = [
        DepToken(_fresh(n), word, upos=tok.upos, head=tok.id, deprel="reparandum")
        for n, word in enumerate(words, start=1)
    ]
    return _renumber(sentence, _insert_before(sentence.tokens, tok.id, inserted))


def remove_reparandum(sentence: AnnotatedSentence) -> AnnotatedSentence:
    """Remove every reparandum token together with anything attached below it."""
    doomed = {tok.id for tok in sentence.tokens if tok.primary == "reparandum"}
    if not doomed:
        return sentence
    changed = True
    while changed:
        below = {tok.id for tok in sentence.tokens if tok.head in doomed} - doomed
        changed = bool(below)
        doomed |= below
    return _renumber(sentence, [t for t in sentence.tokens if t.id not in doomed])


# --- filler (discourse) -------------------------------------------------

def filler_upos(word: str) -> str:
    return "ADV" if word == "like" else "INTJ"


def add_filler(sentence: AnnotatedSentence, position: int, word: str) -> AnnotatedSentence:
    """
    Insert a filler so that it starts at surface `position` (1..n+1).

    The first word attaches to the root with discourse; the remaining words of
    a multiword filler ("you know") attach to the first with fixed.
    """
    if not 1 <= position <= len(sentence) + 1:
        raise TransformError(f"position {position} out of range 1..{len(sentence) + 1}")
    words = word.split()
    if not words:
        raise TransformError("filler is empty")
    root = _root_token(sentence)

    first = DepToken(_fresh(1), words[0], upos=filler_upos(word), head=root.id, deprel="discourse")
    rest = [
        DepToken(_fresh(n), w, upos="INTJ", head=first.id, deprel="fixed")
        for n, w in enumerate(words[1:], start=2)
    ]
    new = [first, *rest]
    if position == len(sentence) + 1:
        return _renumber(sentence, [*sentence.tokens, *new])
    return _renumber(sentence, _insert_before(sentence.tokens, NodeId(position), new))


def remove_filler(sentence: AnnotatedSentence, position: int, word: str) -> AnnotatedSentence:
    """Undo add_filler(position, word); raises TransformError if that filler is not there."""
    words = word.split()
    span = sentence.surface_tokens[position - 1:position - 1 + len(words)]
    if [t.form for t in span] != words or not span or span[0].primary != "discourse":
        raise TransformError(f"no filler {word!r} at position {position}")
    doomed = {t.id for t in span}
    if any(t.head in doomed for t in sentence.tokens if t.id not in doomed):
        raise TransformError(f"filler {word!r} at position {position} has dependents")
    return _renumber(sentence, [t for t in sentence.tokens if t.id not in doomed])
