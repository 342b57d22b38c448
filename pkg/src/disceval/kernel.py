"""All-subtree convolution kernel over labeled ordered trees.

Counts the tree fragments two trees share, where a fragment rooted at a node
keeps either all or none of each included node's children.  All fragments are
weighted equally by default (decay 1.0); a decay in (0, 1) down-weights larger
fragments.  A brute-force fragment enumerator provides the testing oracle for
the dynamic program.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Optional

from .errors import InputError, KernelOverflowError
from .representations import KernelTree


@dataclass(frozen=True)
class KernelConfig:
    decay_weight: float = 1.0
    normalize: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.decay_weight <= 1.0):
            raise InputError(f"decay_weight must be in (0, 1], got {self.decay_weight}")


def _postorder(tree: KernelTree) -> list[KernelTree]:
    out: list[KernelTree] = []
    stack = [(tree, False)]
    while stack:
        node, seen = stack.pop()
        if seen:
            out.append(node)
        else:
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
    return out


def _production(node: KernelTree) -> tuple:
    return (node.label, tuple(c.label for c in node.children))


def subtree_kernel(t1: KernelTree, t2: KernelTree, cfg: KernelConfig = KernelConfig()) -> float:
    """Raw kernel value: sum of matched-fragment weights over all node pairs.

    Delta(n1, n2) is 0 when either node is a leaf or the productions differ,
    else decay * prod_j (1 + Delta(child_j(n1), child_j(n2))).  Node pairs are
    visited in bottom-up order and only where productions match, so work is
    proportional to the number of matching pairs.
    """
    decay = cfg.decay_weight
    nodes1 = [n for n in _postorder(t1) if n.children]
    nodes2 = [n for n in _postorder(t2) if n.children]

    by_production: defaultdict[tuple, list[KernelTree]] = defaultdict(list)
    for node in nodes2:
        by_production[_production(node)].append(node)

    delta: dict[tuple[int, int], float] = {}
    total = 0.0
    for n1 in nodes1:
        for n2 in by_production.get(_production(n1), ()):
            value = decay
            for c1, c2 in zip(n1.children, n2.children):
                value *= 1.0 + delta.get((id(c1), id(c2)), 0.0)
            delta[(id(n1), id(n2))] = value
            total += value
    if not math.isfinite(total):
        raise KernelOverflowError("kernel overflow: accumulated value is not finite")
    return total


def normalized_similarity(
    t1: Optional[KernelTree],
    t2: Optional[KernelTree],
    cfg: KernelConfig = KernelConfig(),
) -> float:
    """Cosine-normalized kernel in [0, 1]; 0 for absent trees or trees without
    any production (a bare leaf has nothing to match)."""
    if t1 is None or t2 is None:
        return 0.0
    k11 = subtree_kernel(t1, t1, cfg)
    k22 = subtree_kernel(t2, t2, cfg)
    if k11 == 0.0 or k22 == 0.0:
        return 0.0
    return subtree_kernel(t1, t2, cfg) / math.sqrt(k11 * k22)


def similarity(
    t1: Optional[KernelTree],
    t2: Optional[KernelTree],
    cfg: KernelConfig = KernelConfig(),
) -> float:
    """Kernel similarity per the config: normalized by default, raw otherwise."""
    if cfg.normalize:
        return normalized_similarity(t1, t2, cfg)
    if t1 is None or t2 is None:
        return 0.0
    return subtree_kernel(t1, t2, cfg)


def _count_nodes(tree: KernelTree) -> int:
    return 1 + sum(_count_nodes(c) for c in tree.children)


def _fragments(node: KernelTree) -> list[tuple]:
    """All fragments rooted at this node (it keeps all its children; each
    internal child either stops or recursively keeps all of its own)."""
    per_child: list[list[tuple]] = []
    for child in node.children:
        options: list[tuple] = [child.label]  # stop here: child becomes a leaf
        if child.children:
            options.extend(_fragments(child))
        per_child.append(options)

    combos: list[tuple] = [()]
    for options in per_child:
        combos = [prefix + (opt,) for prefix in combos for opt in options]
    return [(node.label, combo) for combo in combos]


def brute_force_kernel(t1: KernelTree, t2: KernelTree, node_limit: int = 12) -> float:
    """Oracle: enumerate both fragment multisets and dot them.

    Exponential in tree size, hence the node limit.  Exactly equals
    :func:`subtree_kernel` at decay 1.0.
    """
    for tree in (t1, t2):
        n = _count_nodes(tree)
        if n > node_limit:
            raise InputError(f"brute-force kernel limited to {node_limit} nodes, tree has {n}")

    def multiset(tree: KernelTree) -> Counter:
        counts: Counter = Counter()
        stack = [tree]
        while stack:
            node = stack.pop()
            if node.children:
                counts.update(_fragments(node))
                stack.extend(node.children)
        return counts

    m1, m2 = multiset(t1), multiset(t2)
    if len(m2) < len(m1):
        m1, m2 = m2, m1
    return float(sum(count * m2[frag] for frag, count in m1.items()))
