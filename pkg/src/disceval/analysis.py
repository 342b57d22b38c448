"""Where does the discourse signal come from: ablations, tree-complexity
statistics, label distributions, and good-vs-bad translation cohorts.

Counts, divergences, and the simplified F1 all compare label *multiplicities*
per segment, never positions: two different translations of one source rarely
share leaves, so constituent-level parsing metrics do not apply.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import ComputationError, InputError
from .evaluation import human_system_scores
from .kernel import KernelConfig
from .representations import AblationKind, RepresentationKind
from .scoring import MetricScoreTable, score_dr_metrics
from .trees import RstNode, TreeFile, label_counts, tree_stats
from .tuning import RankingJudgment

KL_EPSILON = 1e-9


def ablation_sweep(
    ref_trees: TreeFile,
    hyp_trees: TreeFile,
    *,
    lang_pair: str,
    system: str,
    config: KernelConfig = KernelConfig(),
) -> MetricScoreTable:
    """Lexicalized-metric scores under every ablation, per segment.

    The full (unablated) column goes through the exact same code path as the
    regular scoring, so the two agree bit for bit.
    """
    table = MetricScoreTable()
    for ablation in AblationKind:
        table.merge(
            score_dr_metrics(
                ref_trees,
                hyp_trees,
                kinds=(RepresentationKind.DR_LEX,),
                ablation=ablation,
                lang_pair=lang_pair,
                system=system,
                config=config,
            )
        )
    return table


@dataclass
class DepthDistribution:
    proportions: dict[int, float]
    depth_avg: float
    depth_min: int
    depth_max: int
    edu_avg: float
    edu_min: int
    edu_max: int
    n_trees: int
    n_absent: int

    def to_dict(self) -> dict:
        return {
            "proportions": {str(k): v for k, v in sorted(self.proportions.items())},
            "depth": {"avg": self.depth_avg, "min": self.depth_min, "max": self.depth_max},
            "edus": {"avg": self.edu_avg, "min": self.edu_min, "max": self.edu_max},
            "n_trees": self.n_trees,
            "n_absent": self.n_absent,
        }


def depth_distribution(trees: TreeFile | Iterable[Optional[RstNode]]) -> DepthDistribution:
    """Proportion of sentences per tree depth, plus depth and EDU-count stats.

    Absent parses are reported in ``n_absent`` and otherwise ignored.
    """
    nodes = list(trees.values()) if isinstance(trees, dict) else list(trees)
    present = [t for t in nodes if t is not None]
    if not present:
        raise InputError("depth distribution needs at least one parsed tree")
    stats = [tree_stats(t) for t in present]
    depths = [s.depth for s in stats]
    edus = [s.edu_count for s in stats]
    hist = Counter(depths)
    n = len(present)
    return DepthDistribution(
        proportions={d: hist[d] / n for d in sorted(hist)},
        depth_avg=sum(depths) / n,
        depth_min=min(depths),
        depth_max=max(depths),
        edu_avg=sum(edus) / n,
        edu_min=min(edus),
        edu_max=max(edus),
        n_trees=n,
        n_absent=len(nodes) - n,
    )


@dataclass
class DistributionReport:
    """Per-label proportions, optionally with a KL divergence to a reference."""

    proportions: dict[str, float]
    kl_to_reference: Optional[float] = None
    epsilon: float = KL_EPSILON

    def to_dict(self) -> dict:
        out = {"proportions": dict(sorted(self.proportions.items())), "epsilon": self.epsilon}
        if self.kl_to_reference is not None:
            out["kl_to_reference"] = self.kl_to_reference
        return out


def label_distribution(trees: TreeFile | Iterable[Optional[RstNode]], kind: str) -> DistributionReport:
    nodes = list(trees.values()) if isinstance(trees, dict) else list(trees)
    counts: Counter = Counter()
    for tree in nodes:
        if tree is not None:
            counts.update(label_counts(tree, kind))
    total = sum(counts.values())
    if total == 0:
        raise ComputationError(f"no {kind} labels found to build a distribution")
    return DistributionReport(proportions={k: v / total for k, v in sorted(counts.items())})


def _proportions(dist) -> dict[str, float]:
    return dist.proportions if isinstance(dist, DistributionReport) else dict(dist)


def kl_divergence(p, q, epsilon: float = KL_EPSILON) -> float:
    """KL(p || q) in nats over the union support, after add-epsilon smoothing
    and renormalization of both sides (so zero counts stay finite)."""
    if epsilon <= 0:
        raise InputError(f"smoothing epsilon must be positive, got {epsilon}")
    pp, qq = _proportions(p), _proportions(q)
    support = sorted(set(pp) | set(qq))
    if not support:
        raise InputError("cannot compare empty distributions")
    ps = [pp.get(label, 0.0) + epsilon for label in support]
    qs = [qq.get(label, 0.0) + epsilon for label in support]
    p_total, q_total = sum(ps), sum(qs)
    return sum(
        (pi / p_total) * math.log((pi / p_total) / (qi / q_total))
        for pi, qi in zip(ps, qs)
    )


@dataclass
class F1Result:
    precision: float
    recall: float
    f1: float
    true_positives: int
    hyp_total: int
    gold_total: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "true_positives": self.true_positives,
            "hyp_total": self.hyp_total,
            "gold_total": self.gold_total,
            "degenerate": self.degenerate,
        }


def _check_alignment(hyp_trees: TreeFile, gold_trees: TreeFile) -> None:
    if set(hyp_trees) != set(gold_trees):
        only_hyp = sorted(set(hyp_trees) - set(gold_trees))
        only_gold = sorted(set(gold_trees) - set(hyp_trees))
        raise InputError(
            f"segment-id mismatch: only in hyp {only_hyp}, only in gold {only_gold}"
        )


def _tree_pairs(hyp_trees: TreeFile, gold_trees: TreeFile):
    _check_alignment(hyp_trees, gold_trees)
    return [(hyp_trees[seg], gold_trees[seg]) for seg in sorted(gold_trees)]


def simplified_f1_pairs(
    pairs: Sequence[tuple[Optional[RstNode], Optional[RstNode]]],
    labels: str | Sequence[str],
    kind: str,
) -> F1Result:
    label_set = (labels,) if isinstance(labels, str) else tuple(labels)
    tp = hyp_total = gold_total = 0
    for hyp, gold in pairs:
        hyp_counts = label_counts(hyp, kind) if hyp is not None else Counter()
        gold_counts = label_counts(gold, kind) if gold is not None else Counter()
        for label in label_set:
            h, g = hyp_counts[label], gold_counts[label]
            tp += min(h, g)
            hyp_total += h
            gold_total += g
    if hyp_total == 0 or gold_total == 0:
        return F1Result(0.0, 0.0, 0.0, tp, hyp_total, gold_total, degenerate=True)
    precision = tp / hyp_total
    recall = tp / gold_total
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return F1Result(precision, recall, f1, tp, hyp_total, gold_total)


def simplified_f1(
    hyp_trees: TreeFile,
    gold_trees: TreeFile,
    labels: str | Sequence[str],
    kind: str,
) -> F1Result:
    """Instance-count F1: a predicted tag counts as correct whenever the gold
    tree contains a tag of the same type, so TP per segment is the minimum of
    the two counts.  A label set is micro-averaged by pooling the counts."""
    return simplified_f1_pairs(_tree_pairs(hyp_trees, gold_trees), labels, kind)


def depth_rmse_pairs(pairs: Sequence[tuple[Optional[RstNode], Optional[RstNode]]]) -> float:
    depths = [
        (tree_stats(hyp).depth, tree_stats(gold).depth)
        for hyp, gold in pairs
        if hyp is not None and gold is not None
    ]
    if not depths:
        raise ComputationError("no aligned parsed tree pairs for depth RMSE")
    return math.sqrt(sum((h - g) ** 2 for h, g in depths) / len(depths))


def depth_rmse(hyp_trees: TreeFile, gold_trees: TreeFile) -> float:
    """Root-mean-squared difference of tree depths over aligned segments
    (pairs with an absent parse on either side are skipped)."""
    return depth_rmse_pairs(_tree_pairs(hyp_trees, gold_trees))


@dataclass
class CohortSpec:
    gold_trees: TreeFile
    good_systems: list[str]
    bad_systems: list[str]
    k: int = 2

    def __post_init__(self) -> None:
        if set(self.good_systems) & set(self.bad_systems):
            raise InputError("good and bad cohorts overlap")


def make_cohorts(
    judgments: Sequence[RankingJudgment],
    lang_pair: str,
    gold_trees: TreeFile,
    k: int = 2,
) -> CohortSpec:
    """Pick the top-k and bottom-k systems by human win ratio; ties break
    lexicographically by system name."""
    human = human_system_scores(judgments)
    systems = sorted({sys for lp, sys in human if lp == lang_pair})
    if not systems:
        raise InputError(f"no judged systems for language pair {lang_pair!r}")
    if 2 * k > len(systems):
        raise InputError(
            f"k={k} needs {2 * k} distinct systems, language pair {lang_pair!r} has {len(systems)}"
        )
    by_score = sorted(systems, key=lambda s: (-human[(lang_pair, s)], s))
    return CohortSpec(
        gold_trees=gold_trees,
        good_systems=by_score[:k],
        bad_systems=sorted(by_score[len(by_score) - k :]),
        k=k,
    )


def _cohort_pairs(
    systems: Sequence[str], trees_by_system: dict[str, TreeFile], gold_trees: TreeFile
):
    pairs = []
    for system in sorted(systems):
        if system not in trees_by_system:
            raise InputError(f"no tree file supplied for system {system!r}")
        pairs.extend(_tree_pairs(trees_by_system[system], gold_trees))
    return pairs


def _distribution_of_pairs(pairs, kind: str, side: int) -> dict[str, float]:
    counts: Counter = Counter()
    for pair in pairs:
        tree = pair[side]
        if tree is not None:
            counts.update(label_counts(tree, kind))
    total = sum(counts.values())
    return {k: v / total for k, v in sorted(counts.items())} if total else {}


def cohort_report(
    spec: CohortSpec,
    trees_by_system: dict[str, TreeFile],
    top_relations: int = 5,
    epsilon: float = KL_EPSILON,
) -> dict:
    """Compare good and bad cohorts against the gold trees on relation and
    nuclearity distributions (with KL), per-label simplified F1, EDU F1, and
    depth RMSE.  F1 micro-averages pool raw counts (frequency-weighted)."""
    gold_relations = label_distribution(spec.gold_trees, "relation")
    ranked_relations = sorted(
        gold_relations.proportions, key=lambda r: (-gold_relations.proportions[r], r)
    )[:top_relations]

    report: dict = {
        "k": spec.k,
        "good_systems": sorted(spec.good_systems),
        "bad_systems": sorted(spec.bad_systems),
        "top_relations": ranked_relations,
        "gold": {
            "relation_distribution": gold_relations.proportions,
            "nuclearity_distribution": label_distribution(spec.gold_trees, "nuclearity").proportions,
        },
        "metadata": {"f1_micro_average": "pooled-counts", "kl_epsilon": epsilon},
        "cohorts": {},
    }

    for name, systems in (("good", spec.good_systems), ("bad", spec.bad_systems)):
        pairs = _cohort_pairs(systems, trees_by_system, spec.gold_trees)
        rel_dist = _distribution_of_pairs(pairs, "relation", side=0)
        nuc_dist = _distribution_of_pairs(pairs, "nuclearity", side=0)
        relation_f1 = {
            label: simplified_f1_pairs(pairs, label, "relation").to_dict()
            for label in ranked_relations
        }
        relation_f1["_micro"] = simplified_f1_pairs(pairs, ranked_relations, "relation").to_dict()
        nuclearity_labels = sorted(report["gold"]["nuclearity_distribution"])
        nuclearity_f1 = {
            label: simplified_f1_pairs(pairs, label, "nuclearity").to_dict()
            for label in nuclearity_labels
        }
        nuclearity_f1["_micro"] = simplified_f1_pairs(pairs, nuclearity_labels, "nuclearity").to_dict()
        report["cohorts"][name] = {
            "systems": sorted(systems),
            "relation_distribution": rel_dist,
            "relation_kl_to_gold": kl_divergence(rel_dist, gold_relations, epsilon),
            "nuclearity_distribution": nuc_dist,
            "nuclearity_kl_to_gold": kl_divergence(
                nuc_dist, report["gold"]["nuclearity_distribution"], epsilon
            ),
            "relation_f1": relation_f1,
            "nuclearity_f1": nuclearity_f1,
            "edu_f1": simplified_f1_pairs(pairs, "EDU", "edu").to_dict(),
            "depth_rmse": depth_rmse_pairs(pairs),
        }
    return report
