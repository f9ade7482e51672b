"""
Synthetic Clean Treebank

A small template grammar that produces well-formed, UD-annotated English
sentences. It stands in for written-text pretraining corpora when the real
treebanks are not at hand, and feeds the augmenter with clean input.
"""
import numpy as np

from .model import AnnotatedSentence, DepToken, NodeId, ROOT

DETERMINERS = ["the", "a", "this", "my", "your", "some"]
NUMERALS = ["two", "three", "four", "five"]
ADJECTIVES = ["big", "small", "old", "new", "red", "happy", "funny", "good"]
NOUNS = ["dog", "cat", "car", "movie", "book", "game", "friend", "house", "phone", "song", "teacher", "city"]
PRONOUNS = ["I", "you", "we", "they", "he", "she"]
ADVERBS = ["really", "also", "never", "just", "usually"]
PREPOSITIONS = ["in", "to", "with", "at", "for", "from"]
AUXILIARIES = ["will", "can", "did", "would"]
COPULAS = ["is", "was"]
# (base form, past form)
TRANSITIVE = [("like", "liked"), ("see", "saw"), ("watch", "watched"), ("read", "read"),
              ("play", "played"), ("love", "loved"), ("want", "wanted"), ("find", "found")]
INTRANSITIVE = [("go", "went"), ("live", "lived"), ("work", "worked"), ("sleep", "slept")]
COGNITION = ["think", "know", "said", "guess"]


class _Builder:
    """Collects tokens with local indices; heads are resolved at the end."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.tokens: list[list] = []  # [form, upos, head_index or 0, deprel]

    def pick(self, options):
        return options[int(self.rng.integers(len(options)))]

    def chance(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def add(self, form: str, upos: str) -> int:
        self.tokens.append([form, upos, None, None])
        return len(self.tokens)

    def attach(self, dep: int, head: int, deprel: str) -> None:
        self.tokens[dep - 1][2] = head
        self.tokens[dep - 1][3] = deprel

    def noun_phrase(self, allow_pronoun: bool = True) -> tuple[list[int], int]:
        """Returns (token indices in order, head index) before attachment."""
        if allow_pronoun and self.chance(0.4):
            head = self.add(self.pick(PRONOUNS), "PRON")
            return [head], head

        parts = []
        plural = False
        if self.chance(0.25):
            parts.append(("num", self.add(self.pick(NUMERALS), "NUM")))
            plural = True
        else:
            parts.append(("det", self.add(self.pick(DETERMINERS), "DET")))
        if self.chance(0.4):
            parts.append(("amod", self.add(self.pick(ADJECTIVES), "ADJ")))
        noun = self.pick(NOUNS)
        head = self.add(noun + "s" if plural else noun, "NOUN")
        for kind, index in parts:
            self.attach(index, head, {"num": "nummod", "det": "det", "amod": "amod"}[kind])
        return [index for _, index in parts] + [head], head

    def prepositional(self, governor_slot: list) -> None:
        case = self.add(self.pick(PREPOSITIONS), "ADP")
        _, head = self.noun_phrase(allow_pronoun=False)
        self.attach(case, head, "case")
        governor_slot.append(head)

    def clause(self) -> int:
        """Build one clause and return the index of its head."""
        kind = self.pick(["transitive", "transitive", "copular", "intransitive"])
        _, subject = self.noun_phrase()

        if kind == "copular":
            cop = self.add(self.pick(COPULAS), "AUX")
            adverb = self.add(self.pick(ADVERBS), "ADV") if self.chance(0.3) else None
            pred = self.add(self.pick(ADJECTIVES), "ADJ")
            self.attach(subject, pred, "nsubj")
            self.attach(cop, pred, "cop")
            if adverb:
                self.attach(adverb, pred, "advmod")
            return pred

        aux = self.add(self.pick(AUXILIARIES), "AUX") if self.chance(0.3) else None
        adverb = self.add(self.pick(ADVERBS), "ADV") if self.chance(0.3) else None
        base, past = self.pick(TRANSITIVE if kind == "transitive" else INTRANSITIVE)
        verb = self.add(base if aux else past, "VERB")
        self.attach(subject, verb, "nsubj")
        if aux:
            self.attach(aux, verb, "aux")
        if adverb:
            self.attach(adverb, verb, "advmod")

        obliques: list[int] = []
        if kind == "transitive":
            _, obj = self.noun_phrase()
            self.attach(obj, verb, "obj")
            if self.chance(0.3):
                self.prepositional(obliques)
        else:
            self.prepositional(obliques)
        for oblique in obliques:
            self.attach(oblique, verb, "obl")
        return verb

    def sentence(self) -> int:
        if self.chance(0.2):
            subject = self.add(self.pick(PRONOUNS), "PRON")
            verb = self.add(self.pick(COGNITION), "VERB")
            self.attach(subject, verb, "nsubj")
            mark = self.add("that", "SCONJ") if self.chance(0.5) else None
            complement = self.clause()
            if mark:
                self.attach(mark, complement, "mark")
            self.attach(complement, verb, "ccomp")
            return verb
        return self.clause()


def synthesize_sentence(rng: np.random.Generator, sent_id: str) -> AnnotatedSentence:
    """Generate one clean sentence from the template grammar."""
    builder = _Builder(rng)
    root = builder.sentence()
    builder.attach(root, 0, "root")
    tokens = [
        DepToken(
            id=NodeId(i),
            form=form,
            upos=upos,
            head=ROOT if head == 0 else NodeId(head),
            deprel=deprel,
        )
        for i, (form, upos, head, deprel) in enumerate(builder.tokens, start=1)
    ]
    text = " ".join(tok.form for tok in tokens)
    return AnnotatedSentence(tokens=tuple(tokens), comments=(f"# sent_id = {sent_id}", f"# text = {text}"))


def synthesize_treebank(count: int, seed: int = 42, prefix: str = "synth") -> list[AnnotatedSentence]:
    """
    Generate a deterministic clean treebank.

    Args:
        count: Number of sentences
        seed: Generator seed; equal seeds give identical treebanks
        prefix: sent_id prefix

    Returns:
        Sentences with sent_ids prefix-1 .. prefix-count
    """
    rng = np.random.default_rng(seed)
    return [synthesize_sentence(rng, f"{prefix}-{i}") for i in range(1, count + 1)]
