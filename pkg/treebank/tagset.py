"""
Relation tagset definition files: one relation name per line, "#" comments.
"""
import re
from pathlib import Path

DEFAULT_TAGSET_PATH = Path(__file__).parent / "data" / "scud.tagset"

_NAME = re.compile(r"^[a-z]+$")


class TagsetError(ValueError):
    """Unreadable or inconsistent tagset definition."""


def parse_tagset(text: str, source: str = "<string>") -> tuple[str, ...]:
    """Parse tagset text into relation names in file order."""
    names = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        entry = line.split("#", 1)[0].strip()
        if not entry:
            continue
        if not _NAME.match(entry):
            raise TagsetError(f"{source}:{line_no}: relation names are lowercase ASCII, got {entry!r}")
        if entry in names:
            raise TagsetError(f"{source}:{line_no}: duplicate relation {entry!r}")
        names.append(entry)
    if "preterm" not in names:
        raise TagsetError(f"{source}: tagset must define preterm")
    if "root" not in names:
        raise TagsetError(f"{source}: tagset must define root")
    return tuple(names)


def load_tagset(path: str | Path | None = None) -> tuple[str, ...]:
    """
    Load a tagset file.

    Args:
        path: Tagset file; the bundled SCUD tagset when None

    Returns:
        Relation names in file order
    """
    path = Path(path) if path else DEFAULT_TAGSET_PATH
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise TagsetError(f"cannot read tagset {path}: {e}") from None
    return parse_tagset(text, source=str(path))
