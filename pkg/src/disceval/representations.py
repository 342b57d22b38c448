"""Kernel-ready views of a discourse tree.

Five representations trade off how much structure, labeling, and lexical
content the all-subtree kernel can match, plus four ablations that blank out
relation labels, nuclearity statuses, or the whole tree skeleton.

The exact node-label conventions are fixed here (and only here) so they can be
revised without touching the kernel:

* DR            spans ``SPAN:<nuc>:<rel>``, leaves ``EDU:<nuc>``, no words.
* DR-LEX        skeleton tags ``SPAN``/``EDU`` with property children
                ``NUC:<nuc>``/``REL:<rel>`` and an ``NGRAM`` group of words,
                so structure-only or label-only matches earn partial credit.
* DR-LEX1       spans labeled by their relation, children wrapped in a
                nuclearity node, EDUs ``EDU:<nuc>`` holding words directly;
                no partial credit.
* DR-LEX1.1     DR-LEX1 plus, per EDU, word-copy groups ``LEX:NUC:<nuc>``,
                ``LEX:REL:<rel>``, ``LEX:NUC:REL:<nuc>:<rel>``.
* DR-LEXe       DR-LEX plus the same three per-EDU groups.

Every lexicalized representation copies a dummy leaf ``*`` under each word so
the kernel can match single words; words are lowercased.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

from .trees import Edu, RstNode, Span, iter_edus

DUMMY = "*"

#: Relation reported for an EDU with no dominating span (trivial tree).
NO_RELATION = "NONE"


@dataclass(frozen=True)
class KernelTree:
    """Generic labeled ordered tree; a node without children is a leaf."""

    label: str
    children: tuple["KernelTree", ...] = ()

    def dump(self) -> str:
        """Bracketed debug form ``label(child,...)``."""
        if not self.children:
            return self.label
        return f"{self.label}({','.join(c.dump() for c in self.children)})"


class RepresentationKind(Enum):
    DR = "DR"
    DR_LEX = "DR-LEX"
    DR_LEX1 = "DR-LEX1"
    DR_LEX1_1 = "DR-LEX1.1"
    DR_LEX_E = "DR-LEXe"


class AblationKind(Enum):
    FULL = "full"
    NO_REL = "norel"
    NO_NUC = "nonuc"
    NO_NUC_NO_REL = "nonucnorel"
    NO_DISCOURSE = "nodiscourse"


ALL_REPRESENTATIONS = tuple(RepresentationKind)
ALL_ABLATIONS = tuple(AblationKind)


def _word(token: str) -> KernelTree:
    return KernelTree(token.lower(), (KernelTree(DUMMY),))


def _words(tokens) -> tuple[KernelTree, ...]:
    return tuple(_word(t) for t in tokens)


def _lex_groups(edu: Edu, dominating_rel: str) -> tuple[KernelTree, ...]:
    # Word-copy subtrees that propagate nuclearity/relation down to the lexical level.
    nuc, rel = edu.nuclearity, dominating_rel
    return (
        KernelTree(f"LEX:NUC:{nuc}", _words(edu.tokens)),
        KernelTree(f"LEX:REL:{rel}", _words(edu.tokens)),
        KernelTree(f"LEX:NUC:REL:{nuc}:{rel}", _words(edu.tokens)),
    )


def _dr(node: RstNode) -> KernelTree:
    if isinstance(node, Edu):
        return KernelTree(f"EDU:{node.nuclearity}")
    return KernelTree(
        f"SPAN:{node.nuclearity}:{node.relation}",
        tuple(_dr(c) for c in node.children),
    )


def _dr_lex(node: RstNode, extended: bool, dominating_rel: str = NO_RELATION) -> KernelTree:
    if isinstance(node, Edu):
        children = [
            KernelTree(f"NUC:{node.nuclearity}"),
            KernelTree("NGRAM", _words(node.tokens)),
        ]
        if extended:
            children.extend(_lex_groups(node, dominating_rel))
        return KernelTree("EDU", tuple(children))
    structural = tuple(_dr_lex(c, extended, node.relation) for c in node.children)
    return KernelTree(
        "SPAN",
        (KernelTree(f"NUC:{node.nuclearity}"), KernelTree(f"REL:{node.relation}")) + structural,
    )


def _dr_lex1(node: RstNode, extended: bool, dominating_rel: str = NO_RELATION) -> KernelTree:
    if isinstance(node, Edu):
        children = _words(node.tokens)
        if extended:
            children += _lex_groups(node, dominating_rel)
        return KernelTree(f"EDU:{node.nuclearity}", children)
    wrapped = tuple(
        KernelTree(c.nuclearity, (_dr_lex1(c, extended, node.relation),))
        for c in node.children
    )
    return KernelTree(node.relation, wrapped)


def to_representation(tree: RstNode, kind: RepresentationKind) -> KernelTree:
    """Deterministic kernel tree for one representation."""
    if kind is RepresentationKind.DR:
        return _dr(tree)
    if kind is RepresentationKind.DR_LEX:
        return _dr_lex(tree, extended=False)
    if kind is RepresentationKind.DR_LEX_E:
        return _dr_lex(tree, extended=True)
    if kind is RepresentationKind.DR_LEX1:
        return _dr_lex1(tree, extended=False)
    if kind is RepresentationKind.DR_LEX1_1:
        return _dr_lex1(tree, extended=True)
    raise ValueError(f"unknown representation {kind!r}")


def _blank_labels(node: RstNode, blank_rel: bool, blank_nuc: bool) -> RstNode:
    nuc = DUMMY if blank_nuc else node.nuclearity
    if isinstance(node, Edu):
        return Edu(nuclearity=nuc, tokens=node.tokens)
    return Span(
        nuclearity=nuc,
        relation=DUMMY if blank_rel else node.relation,
        children=tuple(_blank_labels(c, blank_rel, blank_nuc) for c in node.children),
    )


def flat_word_tree(tree: RstNode) -> KernelTree:
    """Bag-of-words tree: ``ROOT`` over the sentence's words in EDU order."""
    tokens = [t for edu in iter_edus(tree) for t in edu.tokens]
    return KernelTree("ROOT", _words(tokens))


def apply_ablation(tree: RstNode, kind: AblationKind) -> Union[RstNode, KernelTree]:
    """Blank out one layer of discourse information.

    Label-blanking variants return a discourse tree (render it afterwards);
    NO_DISCOURSE drops the structure entirely and returns the flat word tree.
    """
    if kind is AblationKind.FULL:
        return tree
    if kind is AblationKind.NO_REL:
        return _blank_labels(tree, blank_rel=True, blank_nuc=False)
    if kind is AblationKind.NO_NUC:
        return _blank_labels(tree, blank_rel=False, blank_nuc=True)
    if kind is AblationKind.NO_NUC_NO_REL:
        return _blank_labels(tree, blank_rel=True, blank_nuc=True)
    if kind is AblationKind.NO_DISCOURSE:
        return flat_word_tree(tree)
    raise ValueError(f"unknown ablation {kind!r}")


def ablated_kernel_tree(
    tree: RstNode,
    ablation: AblationKind,
    representation: RepresentationKind = RepresentationKind.DR_LEX,
) -> KernelTree:
    """Ablation followed by rendering (DR-LEX by default, the ablation-study base)."""
    ablated = apply_ablation(tree, ablation)
    if isinstance(ablated, KernelTree):
        return ablated
    return to_representation(ablated, representation)


def iter_kernel_nodes(tree: KernelTree):
    yield tree
    for child in tree.children:
        yield from iter_kernel_nodes(child)


def word_sequence(tree: KernelTree, include_lex_copies: bool = False) -> list[str]:
    """Left-to-right labels of word nodes (parents of dummy leaves).

    The per-EDU ``LEX:*`` word copies of the extended representations are
    skipped by default, so the result is the surface token sequence.
    """
    words: list[str] = []

    def walk(node: KernelTree) -> None:
        if not include_lex_copies and node.label.startswith("LEX:"):
            return
        if len(node.children) == 1 and node.children[0].label == DUMMY:
            words.append(node.label)
        for child in node.children:
            walk(child)

    walk(tree)
    return words
