import random
from pathlib import Path

import pytest

from disceval.representations import KernelTree
from disceval.trees import NUCLEUS, ROOT, SATELLITE, Edu, Span

DATA_DIR = Path(__file__).resolve().parents[1] / "data" / "synthetic"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def edu(nuc, text):
    return Edu(nuclearity=nuc, tokens=tuple(text.split()))


def span(nuc, rel, *children):
    return Span(nuclearity=nuc, relation=rel, children=tuple(children))


@pytest.fixture
def trivial_tree():
    return edu(ROOT, "hello")


@pytest.fixture
def attribution_tree():
    return span(
        ROOT, "Attribution", edu(SATELLITE, "he said"), edu(NUCLEUS, "it works")
    )


@pytest.fixture
def corpus_dir():
    return DATA_DIR


def leaf(label):
    return KernelTree(label)


def knode(label, *children):
    return KernelTree(label, tuple(children))


def random_kernel_tree(rng: random.Random, max_nodes: int = 10, alphabet=("A", "B", "C", "D", "E")):
    """Random labeled ordered tree with at most max_nodes nodes."""
    target = rng.randint(1, max_nodes)
    nodes = [[rng.choice(alphabet), []]]
    while len(nodes) < target:
        parent = rng.choice(nodes)
        child = [rng.choice(alphabet), []]
        parent[1].append(child)
        nodes.append(child)

    def freeze(node):
        return KernelTree(node[0], tuple(freeze(c) for c in node[1]))

    return freeze(nodes[0])


WORDS = ["the", "cat", "sat", "on", "a", "mat", "dogs", "ran", "home", "fast"]
RELS = ["Attribution", "Elaboration", "Joint", "Contrast", "Same-Unit", "Condition"]


def random_rst_tree(rng: random.Random, max_depth: int = 3):
    """Random tree satisfying the strict structural invariants."""

    def make_edu(nuc):
        return Edu(nuc, tuple(rng.choice(WORDS) for _ in range(rng.randint(1, 4))))

    def make_node(nuc, depth_left):
        if depth_left == 0 or rng.random() < 0.4:
            return make_edu(nuc)
        n_children = rng.randint(2, 3)
        if rng.random() < 0.5:
            child_nucs = [NUCLEUS] * n_children
        else:
            child_nucs = [SATELLITE] * n_children
            child_nucs[rng.randrange(n_children)] = NUCLEUS
        return Span(
            nuc,
            rng.choice(RELS),
            tuple(make_node(cn, depth_left - 1) for cn in child_nucs),
        )

    return make_node(ROOT, max_depth)
