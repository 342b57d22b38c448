import math
import random

import pytest

from disceval.errors import InputError, KernelOverflowError
from disceval.kernel import (
    KernelConfig,
    brute_force_kernel,
    normalized_similarity,
    similarity,
    subtree_kernel,
)
from disceval.representations import AblationKind, ablated_kernel_tree

from conftest import edu, knode, leaf, random_kernel_tree


def word(w):
    return knode(w, leaf("*"))


AB = knode("EDU", word("a"), word("b"))
AC = knode("EDU", word("a"), word("c"))


class TestSubtreeKernel:
    def test_six_common_fragments(self):
        # a(*), b(*), EDU(a,b), EDU(a(*),b), EDU(a,b(*)), EDU(a(*),b(*))
        assert subtree_kernel(AB, AB) == 6.0
        assert brute_force_kernel(AB, AB) == 6.0

    def test_disjoint_labels(self):
        other = knode("X", knode("y", leaf("z")))
        assert subtree_kernel(AB, other) == 0.0

    def test_bag_of_words_reduction(self):
        t1 = ablated_kernel_tree(edu("Root", "a b"), AblationKind.NO_DISCOURSE)
        t2 = ablated_kernel_tree(edu("Root", "b c"), AblationKind.NO_DISCOURSE)
        assert subtree_kernel(t1, t2) == 1.0

    def test_symmetry_and_nonnegativity(self):
        rng = random.Random(23)
        for _ in range(100):
            t1 = random_kernel_tree(rng)
            t2 = random_kernel_tree(rng)
            k = subtree_kernel(t1, t2)
            assert k >= 0.0
            assert k == subtree_kernel(t2, t1)

    def test_matches_brute_force(self):
        rng = random.Random(29)
        for _ in range(250):
            t1 = random_kernel_tree(rng, max_nodes=10)
            t2 = random_kernel_tree(rng, max_nodes=10)
            assert subtree_kernel(t1, t2) == brute_force_kernel(t1, t2)

    def test_decay_monotonicity(self):
        rng = random.Random(31)
        for _ in range(20):
            t = random_kernel_tree(rng)
            full = subtree_kernel(t, t, KernelConfig(decay_weight=1.0))
            damped = subtree_kernel(t, t, KernelConfig(decay_weight=0.5))
            assert damped <= full

    def test_overflow_detected(self):
        # 160 branches whose diagonal chain deltas reach ~100 each; the root
        # product is ~101**160, far past the double range.
        branches = []
        for i in range(160):
            node = leaf("*")
            for d in range(100):
                node = knode(f"c{i}_{d}", node)
            branches.append(node)
        tree = knode("ROOT", *branches)
        with pytest.raises(KernelOverflowError):
            subtree_kernel(tree, tree)

    def test_decay_validation(self):
        with pytest.raises(InputError):
            KernelConfig(decay_weight=0.0)
        with pytest.raises(InputError):
            KernelConfig(decay_weight=1.5)


class TestBruteForce:
    def test_single_production_self(self):
        t = knode("A", leaf("x"))
        assert brute_force_kernel(t, t) == 1.0

    def test_against_single_leaf(self):
        assert brute_force_kernel(AB, leaf("a")) == 0.0

    def test_node_limit(self):
        rng = random.Random(37)
        big = random_kernel_tree(rng, max_nodes=30)
        while sum(1 for _ in _iter(big)) <= 12:
            big = random_kernel_tree(rng, max_nodes=30)
        with pytest.raises(InputError):
            brute_force_kernel(big, big)


def _iter(tree):
    yield tree
    for child in tree.children:
        yield from _iter(child)


class TestNormalizedSimilarity:
    def test_identical(self):
        rng = random.Random(41)
        for _ in range(50):
            t = random_kernel_tree(rng)
            if not t.children:
                continue
            assert normalized_similarity(t, t) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint(self):
        other = knode("X", knode("y", leaf("z")))
        assert normalized_similarity(AB, other) == 0.0

    def test_partial_overlap_value(self):
        # K12 = delta(a,a) alone: the EDU productions differ in the child list.
        expected = brute_force_kernel(AB, AC) / math.sqrt(
            brute_force_kernel(AB, AB) * brute_force_kernel(AC, AC)
        )
        got = normalized_similarity(AB, AC)
        assert got == pytest.approx(expected, abs=1e-15)
        assert got == pytest.approx(1.0 / 6.0, abs=1e-12)

    def test_absent_inputs(self):
        assert normalized_similarity(None, AB) == 0.0
        assert normalized_similarity(AB, None) == 0.0

    def test_leaf_only_tree(self):
        assert normalized_similarity(leaf("a"), leaf("a")) == 0.0

    def test_bounds(self):
        rng = random.Random(43)
        for _ in range(100):
            t1 = random_kernel_tree(rng)
            t2 = random_kernel_tree(rng)
            value = normalized_similarity(t1, t2)
            assert 0.0 <= value <= 1.0 + 1e-12

    def test_similarity_respects_config(self):
        raw = similarity(AB, AB, KernelConfig(normalize=False))
        assert raw == 6.0
        assert similarity(AB, AB, KernelConfig(normalize=True)) == pytest.approx(1.0)
