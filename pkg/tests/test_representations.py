import random

from disceval.representations import (
    AblationKind,
    KernelTree,
    RepresentationKind,
    ablated_kernel_tree,
    apply_ablation,
    iter_kernel_nodes,
    to_representation,
    word_sequence,
)
from disceval.trees import CANONICAL_RELATIONS, Span, iter_edus

from conftest import edu, random_rst_tree

LEXICALIZED = (
    RepresentationKind.DR_LEX,
    RepresentationKind.DR_LEX1,
    RepresentationKind.DR_LEX1_1,
    RepresentationKind.DR_LEX_E,
)


class TestRepresentations:
    def test_dr_trivial(self, trivial_tree):
        tree = to_representation(edu("Root", "a"), RepresentationKind.DR)
        assert tree == KernelTree("EDU:Root")

    def test_dr_lex1_trivial(self):
        tree = to_representation(edu("Root", "a"), RepresentationKind.DR_LEX1)
        assert tree.dump() == "EDU:Root(a(*))"

    def test_dr_lex_two_edu(self, attribution_tree):
        tree = to_representation(attribution_tree, RepresentationKind.DR_LEX)
        assert tree.dump() == (
            "SPAN(NUC:Root,REL:Attribution,"
            "EDU(NUC:Satellite,NGRAM(he(*),said(*))),"
            "EDU(NUC:Nucleus,NGRAM(it(*),works(*))))"
        )

    def test_dr_two_edu(self, attribution_tree):
        tree = to_representation(attribution_tree, RepresentationKind.DR)
        assert tree.dump() == "SPAN:Root:Attribution(EDU:Satellite,EDU:Nucleus)"

    def test_dr_has_no_words_or_dummies(self):
        rng = random.Random(3)
        for _ in range(50):
            tree = to_representation(random_rst_tree(rng), RepresentationKind.DR)
            labels = {n.label for n in iter_kernel_nodes(tree)}
            assert "*" not in labels
            assert not word_sequence(tree)

    def test_token_preservation(self):
        rng = random.Random(5)
        for _ in range(50):
            rst = random_rst_tree(rng)
            tokens = [t.lower() for e in iter_edus(rst) for t in e.tokens]
            for kind in LEXICALIZED:
                assert word_sequence(to_representation(rst, kind)) == tokens

    def test_words_lowercased(self):
        rst = edu("Root", "Hello World")
        tree = to_representation(rst, RepresentationKind.DR_LEX1)
        assert word_sequence(tree) == ["hello", "world"]

    def test_deterministic(self):
        rng = random.Random(9)
        for _ in range(20):
            rst = random_rst_tree(rng)
            for kind in RepresentationKind:
                assert to_representation(rst, kind) == to_representation(rst, kind)

    def test_dr_lex1_1_edu_groups(self, attribution_tree):
        tree = to_representation(attribution_tree, RepresentationKind.DR_LEX1_1)
        edus = [n for n in iter_kernel_nodes(tree) if n.label.startswith("EDU:")]
        assert len(edus) == 2
        satellite = next(n for n in edus if n.label == "EDU:Satellite")
        labels = [c.label for c in satellite.children]
        assert labels == [
            "he",
            "said",
            "LEX:NUC:Satellite",
            "LEX:REL:Attribution",
            "LEX:NUC:REL:Satellite:Attribution",
        ]
        for group in satellite.children[2:]:
            assert [c.label for c in group.children] == ["he", "said"]

    def test_dr_lex_e_edu_groups(self, attribution_tree):
        tree = to_representation(attribution_tree, RepresentationKind.DR_LEX_E)
        edus = [n for n in iter_kernel_nodes(tree) if n.label == "EDU"]
        assert len(edus) == 2
        for node in edus:
            labels = [c.label for c in node.children]
            assert labels[0].startswith("NUC:")
            assert labels[1] == "NGRAM"
            assert labels[2].startswith("LEX:NUC:")
            assert labels[3].startswith("LEX:REL:")
            assert labels[4].startswith("LEX:NUC:REL:")

    def test_trivial_tree_dominating_relation_is_none(self):
        tree = to_representation(edu("Root", "a"), RepresentationKind.DR_LEX1_1)
        labels = {n.label for n in iter_kernel_nodes(tree)}
        assert "LEX:REL:NONE" in labels
        assert "LEX:NUC:REL:Root:NONE" in labels


class TestAblations:
    def test_norel_keeps_nuclearity(self, attribution_tree):
        ablated = apply_ablation(attribution_tree, AblationKind.NO_REL)
        assert isinstance(ablated, Span)
        assert ablated.relation == "*"
        assert ablated.children[0].nuclearity == "Satellite"
        assert ablated.children[1].nuclearity == "Nucleus"

    def test_nonuc_keeps_relation(self, attribution_tree):
        ablated = apply_ablation(attribution_tree, AblationKind.NO_NUC)
        assert ablated.relation == "Attribution"
        assert ablated.nuclearity == "*"
        assert all(c.nuclearity == "*" for c in ablated.children)

    def test_no_discourse_flat(self, attribution_tree):
        flat = apply_ablation(attribution_tree, AblationKind.NO_DISCOURSE)
        assert flat.dump() == "ROOT(he(*),said(*),it(*),works(*))"

    def test_full_is_identity(self, trivial_tree, attribution_tree):
        for tree in (trivial_tree, attribution_tree):
            assert apply_ablation(tree, AblationKind.FULL) is tree

    def test_nonucnorel_scrubs_all_labels(self):
        rng = random.Random(21)
        nuc_words = {"Nucleus", "Satellite"}
        for _ in range(30):
            rst = random_rst_tree(rng)
            rendered = ablated_kernel_tree(rst, AblationKind.NO_NUC_NO_REL)
            for node in iter_kernel_nodes(rendered):
                assert node.label not in CANONICAL_RELATIONS
                assert not any(w in node.label for w in nuc_words)

    def test_ablated_kernel_tree_tokens(self, attribution_tree):
        for kind in (AblationKind.NO_REL, AblationKind.NO_NUC, AblationKind.NO_DISCOURSE):
            rendered = ablated_kernel_tree(attribution_tree, kind)
            assert word_sequence(rendered) == ["he", "said", "it", "works"]
