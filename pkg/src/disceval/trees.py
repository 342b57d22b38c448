"""Sentence-level RST discourse trees: in-memory model, JSON-lines I/O, statistics.

A tree node is either an EDU leaf (nuclearity + tokens) or a span (nuclearity +
relation + two or more children).  Trees arrive from upstream discourse parsers
as one JSON object per line; a ``null`` tree marks a segment whose parse is
absent, which downstream scoring maps to similarity 0.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import TreeSyntaxError, TreeValidationError, ValidationWarning

NUCLEUS = "Nucleus"
SATELLITE = "Satellite"
ROOT = "Root"
NUCLEARITIES = (NUCLEUS, SATELLITE, ROOT)

#: The 18 coarse-grained relation classes of the RST Discourse Treebank.
CANONICAL_RELATIONS = frozenset(
    {
        "Attribution",
        "Background",
        "Cause",
        "Comparison",
        "Condition",
        "Contrast",
        "Elaboration",
        "Enablement",
        "Evaluation",
        "Explanation",
        "Joint",
        "Manner-Means",
        "Same-Unit",
        "Summary",
        "Temporal",
        "Textual-Organization",
        "Topic-Change",
        "Topic-Comment",
    }
)


@dataclass(frozen=True)
class Edu:
    """Elementary discourse unit: an atomic clause-like token span."""

    nuclearity: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Span:
    """Internal node joining two or more discourse units under one relation."""

    nuclearity: str
    relation: str
    children: tuple["RstNode", ...]


RstNode = Union[Edu, Span]

#: Segment id -> tree; ``None`` marks an absent (void) parse.
TreeFile = dict[int, Optional[RstNode]]


@dataclass(frozen=True)
class TreeStats:
    depth: int
    edu_count: int
    token_count: int


def validate(node: RstNode, strict: bool = False, _is_root: bool = True) -> None:
    """Check the structural invariants of a tree.

    In strict mode violations raise :class:`TreeValidationError`; in lenient
    mode (the default, since MT output yields degraded parses) they only emit
    a :class:`ValidationWarning`.
    """

    def complain(msg: str) -> None:
        if strict:
            raise TreeValidationError(msg)
        warnings.warn(msg, ValidationWarning, stacklevel=3)

    expected = (ROOT,) if _is_root else (NUCLEUS, SATELLITE)
    if node.nuclearity not in expected:
        complain(
            f"bad nuclearity {node.nuclearity!r} on {'root' if _is_root else 'non-root'} node"
        )

    if isinstance(node, Edu):
        if not node.tokens:
            complain("EDU with empty token list")
        if any(not tok for tok in node.tokens):
            complain("EDU contains an empty token")
        return

    if not node.relation:
        complain("span with empty relation label")
    elif node.relation not in CANONICAL_RELATIONS:
        complain(f"relation {node.relation!r} outside the canonical 18-label set")
    if len(node.children) < 2:
        complain(f"span with {len(node.children)} child(ren); need at least 2")
    else:
        nucs = [c.nuclearity for c in node.children]
        n_nuclei = sum(1 for n in nucs if n == NUCLEUS)
        multinuclear = n_nuclei == len(nucs)
        mononuclear = n_nuclei == 1 and all(n in (NUCLEUS, SATELLITE) for n in nucs)
        if not (multinuclear or mononuclear):
            complain(f"span children have nuclearity pattern {nucs}; "
                     "expected all-Nucleus or exactly one Nucleus")
    for child in node.children:
        validate(child, strict=strict, _is_root=False)


def _node_from_obj(obj: object) -> RstNode:
    if not isinstance(obj, dict):
        raise TreeSyntaxError(f"tree node must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind == "edu":
        tokens = obj.get("tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise TreeSyntaxError("edu node needs a 'tokens' list of strings")
        return Edu(nuclearity=_nuc_from_obj(obj), tokens=tuple(tokens))
    if kind == "span":
        rel = obj.get("rel")
        if not isinstance(rel, str):
            raise TreeSyntaxError("span node needs a string 'rel'")
        children = obj.get("children")
        if not isinstance(children, list):
            raise TreeSyntaxError("span node needs a 'children' list")
        return Span(
            nuclearity=_nuc_from_obj(obj),
            relation=rel,
            children=tuple(_node_from_obj(c) for c in children),
        )
    raise TreeSyntaxError(f"unknown node kind {kind!r}; expected 'edu' or 'span'")


def _nuc_from_obj(obj: dict) -> str:
    nuc = obj.get("nuc")
    if not isinstance(nuc, str):
        raise TreeSyntaxError("node needs a string 'nuc'")
    return nuc


def _node_to_obj(node: RstNode) -> dict:
    if isinstance(node, Edu):
        return {"kind": "edu", "nuc": node.nuclearity, "tokens": list(node.tokens)}
    return {
        "kind": "span",
        "nuc": node.nuclearity,
        "rel": node.relation,
        "children": [_node_to_obj(c) for c in node.children],
    }


def parse_tree(text: str, strict: bool = False) -> RstNode:
    """Parse a one-line JSON tree and validate it."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeSyntaxError(f"malformed tree JSON: {exc}") from exc
    node = _node_from_obj(obj)
    validate(node, strict=strict)
    return node


def serialize_tree(tree: RstNode) -> str:
    """One-line JSON form; inverse of :func:`parse_tree`."""
    return json.dumps(_node_to_obj(tree), ensure_ascii=False, separators=(",", ":"))


def load_tree_file(path, strict: bool = False) -> TreeFile:
    """Read a `{"seg": id, "tree": node|null}` JSON-lines file."""
    trees: TreeFile = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TreeSyntaxError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if not isinstance(record, dict) or "seg" not in record or "tree" not in record:
                raise TreeSyntaxError(f"{path}:{lineno}: expected object with 'seg' and 'tree'")
            seg = record["seg"]
            if not isinstance(seg, int):
                raise TreeSyntaxError(f"{path}:{lineno}: 'seg' must be an integer")
            if seg in trees:
                raise TreeSyntaxError(f"{path}:{lineno}: duplicate segment id {seg}")
            if record["tree"] is None:
                trees[seg] = None
            else:
                node = _node_from_obj(record["tree"])
                try:
                    validate(node, strict=strict)
                except TreeValidationError as exc:
                    raise TreeValidationError(f"{path}:{lineno}: {exc}") from exc
                trees[seg] = node
    return dict(sorted(trees.items()))


def save_tree_file(trees: TreeFile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for seg in sorted(trees):
            tree = trees[seg]
            obj = {"seg": seg, "tree": None if tree is None else _node_to_obj(tree)}
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")


def iter_edus(tree: RstNode) -> Iterator[Edu]:
    """Left-to-right EDU leaves."""
    if isinstance(tree, Edu):
        yield tree
    else:
        for child in tree.children:
            yield from iter_edus(child)


def iter_nodes(tree: RstNode) -> Iterator[RstNode]:
    yield tree
    if isinstance(tree, Span):
        for child in tree.children:
            yield from iter_nodes(child)


def depth(tree: RstNode) -> int:
    """RST edges from the root to the deepest EDU (0 for a bare EDU).

    Counts discourse-tree edges only; representation artifacts such as dummy
    leaves never enter here.
    """
    if isinstance(tree, Edu):
        return 0
    return 1 + max(depth(c) for c in tree.children)


def tree_stats(tree: RstNode) -> TreeStats:
    edus = list(iter_edus(tree))
    return TreeStats(
        depth=depth(tree),
        edu_count=len(edus),
        token_count=sum(len(e.tokens) for e in edus),
    )


def label_counts(tree: RstNode, kind: str) -> Counter:
    """Multiset of labels of one aspect of the tree.

    ``relation`` counts span relations, ``nuclearity`` counts the status of
    every non-root node, ``edu`` counts leaves (under the single label "EDU").
    """
    counts: Counter = Counter()
    if kind == "relation":
        for node in iter_nodes(tree):
            if isinstance(node, Span):
                counts[node.relation] += 1
    elif kind == "nuclearity":
        for node in iter_nodes(tree):
            if node is not tree:
                counts[node.nuclearity] += 1
    elif kind == "edu":
        counts["EDU"] = sum(1 for _ in iter_edus(tree))
    else:
        raise ValueError(f"unknown label kind {kind!r}; expected relation|nuclearity|edu")
    return counts
