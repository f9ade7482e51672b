"""
scudkit Results Ledger

Keeps evaluation runs in a JSON file so parser regimes (baseline,
in-domain only, fine-tuned) can be compared side by side.
"""
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import List, TypedDict

from config import config

log = logging.getLogger(__name__)


class Result(TypedDict):
    name: str  # e.g. "EWT+Tweebank", "ConvBank", "Fine-tune"
    gold: str
    predicted: str
    uas: float
    las: float
    tokens: int
    recorded: str


def _ledger_file(path: str | Path | None = None) -> Path:
    return Path(path or config.LEDGER_PATH).expanduser()


def _load_results(path: str | Path | None = None) -> List[Result]:
    ledger = _ledger_file(path)
    if not ledger.exists():
        return []
    try:
        return json.loads(ledger.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        log.warning("ledger %s is not valid JSON; starting a new one", ledger)
        return []


def _save_results(results: List[Result], path: str | Path | None = None):
    ledger = _ledger_file(path)
    ledger.parent.mkdir(parents=True, exist_ok=True)
    ledger.write_text(json.dumps(results, indent=2), encoding="utf-8")


def add_result(
    name: str,
    uas: float,
    las: float,
    tokens: int,
    gold: str = "",
    predicted: str = "",
    path: str | Path | None = None,
) -> Result:
    """Record a run; an earlier run with the same name is replaced."""
    results = [r for r in _load_results(path) if r["name"] != name]
    result: Result = {
        "name": name,
        "gold": gold,
        "predicted": predicted,
        "uas": round(uas, 2),
        "las": round(las, 2),
        "tokens": tokens,
        "recorded": datetime.now().isoformat(timespec="seconds"),
    }
    results.append(result)
    _save_results(results, path)
    log.info("recorded %s: UAS %.2f LAS %.2f", name, uas, las)
    return result


def get_results(path: str | Path | None = None) -> List[Result]:
    return _load_results(path)


def get_results_table(path: str | Path | None = None, fmt: str = "text") -> str:
    """Dataset / UAS / LAS table in the order runs were recorded."""
    results = _load_results(path)
    if fmt == "json":
        return json.dumps(results, indent=2) + "\n"
    if fmt == "tsv":
        lines = ["dataset\tuas\tlas\ttokens"]
        lines += [f"{r['name']}\t{r['uas']:.2f}\t{r['las']:.2f}\t{r['tokens']}" for r in results]
        return "\n".join(lines) + "\n"
    if not results:
        return "No results recorded yet.\n"
    width = max(len(r["name"]) for r in results + [{"name": "Dataset"}])
    lines = [f"{'Dataset':<{width}}  {'UAS':>6}  {'LAS':>6}"]
    lines += [f"{r['name']:<{width}}  {r['uas']:>6.2f}  {r['las']:>6.2f}" for r in results]
    return "\n".join(lines) + "\n"
