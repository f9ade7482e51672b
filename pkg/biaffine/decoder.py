"""
Tree decoding: maximum spanning arborescence with a single ROOT child, and
label assignment on the chosen arcs.

Heads are returned as integer positions, 0 for ROOT and 1..n for tokens.
"""
from typing import Sequence

import numpy as np


def _find_cycle(heads: np.ndarray) -> list[int] | None:
    """A cycle in a head array (heads[0] unused), or None."""
    n = len(heads)
    state = np.zeros(n, dtype=np.int8)  # 0 new, 1 on path, 2 done
    state[0] = 2
    for start in range(1, n):
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = heads[node]
        if state[node] == 1:
            return path[path.index(node):]
        for visited in path:
            state[visited] = 2
    return None


def _chu_liu_edmonds(scores: np.ndarray) -> np.ndarray:
    """
    Maximum arborescence rooted at node 0 of a square [head, dependent]
    matrix; -inf marks forbidden arcs.
    """
    m = len(scores)
    heads = np.argmax(scores, axis=0)
    heads[0] = -1
    cycle = _find_cycle(heads)
    if cycle is None:
        return heads

    in_cycle = np.zeros(m, dtype=bool)
    in_cycle[cycle] = True
    rest = np.flatnonzero(~in_cycle)  # node 0 first
    members = np.array(cycle)
    kept = scores[heads[members], members]

    # contract the cycle into a new last node
    k = len(rest)
    contracted = np.full((k + 1, k + 1), -np.inf)
    contracted[:k, :k] = scores[np.ix_(rest, rest)]

    enter_gain = scores[np.ix_(rest, members)] - kept  # rest x cycle
    enter = np.argmax(enter_gain, axis=1)
    contracted[:k, k] = enter_gain[np.arange(k), enter]

    leave_scores = scores[np.ix_(members, rest)]  # cycle x rest
    leave = np.argmax(leave_scores, axis=0)
    contracted[k, :k] = leave_scores[leave, np.arange(k)]

    sub = _chu_liu_edmonds(contracted)

    result = heads.copy()
    for i, node in enumerate(rest):
        if i == 0:
            continue
        head = sub[i]
        result[node] = members[leave[i]] if head == k else rest[head]
    outside = sub[k]
    result[members[enter[outside]]] = rest[outside]
    return result


def _square(arcs: np.ndarray) -> np.ndarray:
    n = arcs.shape[1]
    scores = np.full((n + 1, n + 1), -np.inf)
    scores[:, 1:] = arcs
    np.fill_diagonal(scores, -np.inf)
    return scores


def tree_score(arcs: np.ndarray, heads: Sequence[int]) -> float:
    """Total score of a head assignment over an (n+1) x n arc matrix."""
    return float(sum(arcs[h, d] for d, h in enumerate(heads)))


def decode_mst(arcs: np.ndarray) -> np.ndarray:
    """
    Highest-scoring tree with exactly one token attached to ROOT.

    `arcs` is the (n+1) x n head-by-dependent matrix. When the unconstrained
    arborescence has several ROOT children, every token is tried as the only
    ROOT child and the best resulting tree kept (earliest token on ties).
    """
    arcs = np.asarray(arcs, dtype=np.float64)
    n = arcs.shape[1]
    if n == 1:
        return np.zeros(1, dtype=np.int64)

    scores = _square(arcs)
    heads = _chu_liu_edmonds(scores)[1:]
    if np.count_nonzero(heads == 0) == 1:
        return heads.astype(np.int64)

    best, best_score = None, -np.inf
    for root in range(1, n + 1):
        if not np.isfinite(scores[0, root]):
            continue
        constrained = scores.copy()
        constrained[0, :] = -np.inf
        constrained[0, root] = scores[0, root]
        candidate = _chu_liu_edmonds(constrained)[1:]
        total = tree_score(arcs, candidate)
        if total > best_score:
            best, best_score = candidate, total
    return best.astype(np.int64)


def assign_labels(label_scores: np.ndarray, heads: Sequence[int], labels: Sequence[str], root_label: str = "root") -> list[str]:
    """
    Best label for each token at its chosen head.

    ROOT's child always gets `root_label`; no other token ever does.
    """
    root_index = labels.index(root_label) if root_label in labels else None
    out = []
    for d, h in enumerate(heads):
        if h == 0:
            out.append(root_label)
            continue
        scores = np.array(label_scores[h, d], dtype=np.float64)
        if root_index is not None and len(labels) > 1:
            scores[root_index] = -np.inf
        out.append(labels[int(np.argmax(scores))])
    return out
