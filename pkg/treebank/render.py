"""
Static dependency-tree diagrams: an indented text tree and an SVG with arcs
drawn above the words.
"""
from xml.sax.saxutils import escape

from .model import AnnotatedSentence, DepToken, NodeId, ROOT


def render_text(sentence: AnnotatedSentence) -> str:
    """
    Indented tree, one node per line:

        got VERB root
        ├── E1.1 PRON nsubj
        └── dogs NOUN obj
            └── two NUM nummod
    """
    lines = []
    if sentence.raw_text:
        lines.append(f"# {sentence.raw_text}")

    def label(tok: DepToken) -> str:
        return f"{tok.form} {tok.upos} {tok.deprel or '_'}"

    def walk(node: NodeId, prefix: str, seen: set) -> None:
        children = sentence.dependents(node)
        for i, child in enumerate(children):
            last = i == len(children) - 1
            lines.append(f"{prefix}{'└── ' if last else '├── '}{label(child)}")
            if child.id in seen:
                continue
            seen.add(child.id)
            walk(child.id, prefix + ("    " if last else "│   "), seen)

    seen: set = set()
    for root in sentence.root_tokens():
        lines.append(label(root))
        seen.add(root.id)
        walk(root.id, "", seen)

    # cycles and unattached tokens never hang off ROOT
    stray = [tok for tok in sentence.tokens if tok.id not in seen]
    for tok in stray:
        head = "_" if tok.head is None else str(tok.head)
        lines.append(f"? {label(tok)} (head {head})")
    return "\n".join(lines) + "\n"


def render_svg(sentence: AnnotatedSentence, word_gap: int = 90, level_height: int = 28) -> str:
    """Words left to right with labelled arcs above them; the root gets a vertical ROOT arrow."""
    tokens = list(sentence.tokens)
    position = {tok.id: i for i, tok in enumerate(tokens)}
    x = [40 + i * word_gap for i in range(len(tokens))]

    arcs = [tok for tok in tokens if tok.head is not None and tok.head != ROOT and tok.head in position]
    # shorter arcs sit lower
    arcs.sort(key=lambda tok: (abs(position[tok.id] - position[tok.head]), position[tok.id]))
    levels: dict[NodeId, int] = {}
    occupied: list[set] = []
    for tok in arcs:
        lo, hi = sorted((position[tok.id], position[tok.head]))
        inner = set(range(lo + 1, hi))
        level = 0
        # an arc must clear every shorter arc nested inside its span
        while level < len(occupied) and occupied[level] & (inner | {lo, hi}):
            level += 1
        if level == len(occupied):
            occupied.append(set())
        occupied[level] |= inner | {lo, hi}
        levels[tok.id] = level + 1

    top = level_height * (max(levels.values(), default=0) + 2)
    baseline = top + 30
    width = x[-1] + 80 if x else 80
    height = baseline + 40

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="13">',
        '<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="4" refY="4" orient="auto">'
        '<path d="M0,0 L8,4 L0,8 z"/></marker></defs>',
    ]
    for i, tok in enumerate(tokens):
        style = ' font-style="italic" fill="#666"' if tok.is_empty else ""
        parts.append(f'<text x="{x[i]}" y="{baseline}" text-anchor="middle"{style}>{escape(tok.form)}</text>')
        parts.append(f'<text x="{x[i]}" y="{baseline + 16}" text-anchor="middle" font-size="10" fill="#888">'
                     f'{escape(tok.upos)}</text>')

    for tok in arcs:
        h, d = position[tok.head], position[tok.id]
        y = baseline - 16 - level_height * levels[tok.id]
        x1, x2 = x[h], x[d]
        parts.append(
            f'<path d="M{x1},{baseline - 16} L{x1},{y} L{x2},{y} L{x2},{baseline - 18}" '
            f'fill="none" stroke="#333" marker-end="url(#arrow)"/>'
        )
        parts.append(f'<text x="{(x1 + x2) / 2}" y="{y - 3}" text-anchor="middle" font-size="11">'
                     f'{escape(tok.deprel)}</text>')

    for tok in sentence.root_tokens():
        xr = x[position[tok.id]]
        parts.append(f'<path d="M{xr},10 L{xr},{baseline - 18}" stroke="#333" marker-end="url(#arrow)"/>')
        parts.append(f'<text x="{xr + 4}" y="20" font-size="11">ROOT</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
