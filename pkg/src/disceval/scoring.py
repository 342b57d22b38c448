"""Per-segment metric scores: discourse-tree similarities, external score
ingestion, min-max normalization, and linear combination.

Scores live in a table keyed by (metric, lang_pair, system, segment).  The
discourse metrics are produced here from aligned tree files; everything else
(BLEU, TER, ...) is ingested from TSV, never computed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

from .errors import DataWarning, InputError, KernelOverflowError
from .kernel import KernelConfig, normalized_similarity, subtree_kernel
from .representations import AblationKind, RepresentationKind, ablated_kernel_tree
from .trees import TreeFile

if TYPE_CHECKING:
    from .tuning import CombinedMetricModel

Key = tuple[str, str, str, int]  # (metric, lang_pair, system, segment)

SCORE_HEADER = ("metric", "lang_pair", "system", "segment", "score")

#: Name under which a weighted combination is emitted.
COMBINED_METRIC = "COMBINED"


@dataclass
class MetricScoreTable:
    scores: dict[Key, float] = field(default_factory=dict)

    def add(self, metric: str, lang_pair: str, system: str, segment: int, score: float) -> None:
        key = (metric, lang_pair, system, segment)
        if key in self.scores:
            raise InputError(f"duplicate score for {key}")
        if not math.isfinite(score):
            raise InputError(f"non-finite score for {key}: {score}")
        self.scores[key] = score

    def get(self, metric: str, lang_pair: str, system: str, segment: int) -> Optional[float]:
        return self.scores.get((metric, lang_pair, system, segment))

    def metrics(self) -> list[str]:
        return sorted({k[0] for k in self.scores})

    def lang_pairs(self) -> list[str]:
        return sorted({k[1] for k in self.scores})

    def systems(self, lang_pair: str) -> list[str]:
        return sorted({k[2] for k in self.scores if k[1] == lang_pair})

    def rows(self) -> list[tuple[str, str, str, int, float]]:
        return [(m, lp, sys, seg, v) for (m, lp, sys, seg), v in sorted(self.scores.items())]

    def restrict(self, metric: str) -> "MetricScoreTable":
        return MetricScoreTable(
            {k: v for k, v in self.scores.items() if k[0] == metric}
        )

    def merge(self, other: "MetricScoreTable") -> None:
        for key, value in other.scores.items():
            if key in self.scores:
                raise InputError(f"duplicate score for {key} while merging tables")
            self.scores[key] = value


def metric_name(kind: RepresentationKind, ablation: AblationKind) -> str:
    if ablation is AblationKind.FULL:
        return kind.value
    return f"{kind.value}@{ablation.value}"


def score_dr_metrics(
    ref_trees: TreeFile,
    hyp_trees: TreeFile,
    kinds: Sequence[RepresentationKind] = tuple(RepresentationKind),
    ablation: AblationKind = AblationKind.FULL,
    *,
    lang_pair: str,
    system: str,
    config: KernelConfig = KernelConfig(),
) -> MetricScoreTable:
    """Similarity of each hypothesis tree to its reference, per representation.

    An absent parse on either side scores 0; a kernel overflow falls back to 0
    with a warning rather than aborting the corpus.
    """
    missing_ref = sorted(set(hyp_trees) - set(ref_trees))
    missing_hyp = sorted(set(ref_trees) - set(hyp_trees))
    if missing_ref or missing_hyp:
        raise InputError(
            "segment-id mismatch between tree files: "
            f"missing from refs {missing_ref}, missing from hyps {missing_hyp}"
        )

    table = MetricScoreTable()
    for kind in kinds:
        name = metric_name(kind, ablation)
        for seg in sorted(ref_trees):
            ref, hyp = ref_trees[seg], hyp_trees[seg]
            if ref is None or hyp is None:
                score = 0.0
            else:
                kt_ref = ablated_kernel_tree(ref, ablation, kind)
                kt_hyp = ablated_kernel_tree(hyp, ablation, kind)
                try:
                    if config.normalize:
                        score = normalized_similarity(kt_ref, kt_hyp, config)
                    else:
                        score = subtree_kernel(kt_ref, kt_hyp, config)
                except KernelOverflowError:
                    warnings.warn(
                        f"kernel overflow for {name} segment {seg}; scoring 0",
                        DataWarning,
                        stacklevel=2,
                    )
                    score = 0.0
            table.add(name, lang_pair, system, seg, score)
    return table


def load_external_scores(path) -> MetricScoreTable:
    """Read a score TSV (`metric  lang_pair  system  segment  score`)."""
    table = MetricScoreTable()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if tuple(header.split("\t")) != SCORE_HEADER:
            raise InputError(f"{path}:1: expected header {'	'.join(SCORE_HEADER)!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise InputError(f"{path}:{lineno}: expected 5 tab-separated fields")
            metric, lang_pair, system, seg_text, score_text = parts
            try:
                segment = int(seg_text)
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: bad segment id {seg_text!r}") from exc
            try:
                score = float(score_text)
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: bad score {score_text!r}") from exc
            try:
                table.add(metric, lang_pair, system, segment, score)
            except InputError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
    return table


def save_scores(table: MetricScoreTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(SCORE_HEADER) + "\n")
        for metric, lang_pair, system, segment, score in table.rows():
            fh.write(f"{metric}\t{lang_pair}\t{system}\t{segment}\t{score:.12g}\n")


NormalizationRanges = dict[str, tuple[float, float]]


def minmax_normalize(
    table: MetricScoreTable,
    ranges: Optional[NormalizationRanges] = None,
) -> tuple[MetricScoreTable, NormalizationRanges]:
    """Rescale each metric to [0, 1].

    Without supplied ranges the min/max are taken from the table itself
    (tuning time); with supplied ranges they are reused and the outputs are
    clamped to [0, 1] (test time).  A constant column maps to all zeros.
    """
    if not table.scores:
        raise InputError("cannot normalize an empty score table")
    fitting = ranges is None
    if fitting:
        ranges = {}
        for (metric, _, _, _), value in table.scores.items():
            lo, hi = ranges.get(metric, (math.inf, -math.inf))
            ranges[metric] = (min(lo, value), max(hi, value))

    out = MetricScoreTable()
    degenerate: set[str] = set()
    for (metric, lang_pair, system, segment), value in table.scores.items():
        if metric not in ranges:
            raise InputError(f"no normalization range for metric {metric!r}")
        lo, hi = ranges[metric]
        if hi <= lo:
            degenerate.add(metric)
            scaled = 0.0
        else:
            scaled = (value - lo) / (hi - lo)
            if not fitting:
                scaled = min(1.0, max(0.0, scaled))
        out.add(metric, lang_pair, system, segment, scaled)
    for metric in sorted(degenerate):
        warnings.warn(
            f"metric {metric!r} has a degenerate (constant) range; all scores set to 0",
            DataWarning,
            stacklevel=2,
        )
    return out, dict(sorted(ranges.items()))


def combine(table: MetricScoreTable, model: "CombinedMetricModel") -> MetricScoreTable:
    """Weighted sum of normalized metric scores, emitted as one combined metric.

    Missing per-segment scores count as 0 (with a warning); a metric entirely
    absent from the table is an error.
    """
    available = set(table.metrics())
    missing_metrics = [m for m in model.metrics if m not in available]
    if missing_metrics:
        raise InputError(f"score table lacks model metrics: {missing_metrics}")

    grid = sorted({(lp, sys, seg) for (_, lp, sys, seg) in table.scores})
    out = MetricScoreTable()
    n_missing = 0
    for lang_pair, system, segment in grid:
        total = 0.0
        for metric, weight in zip(model.metrics, model.weights):
            value = table.get(metric, lang_pair, system, segment)
            if value is None:
                n_missing += 1
                value = 0.0
            total += weight * value
        out.add(COMBINED_METRIC, lang_pair, system, segment, total)
    if n_missing:
        warnings.warn(
            f"{n_missing} missing metric scores treated as 0 in the combination",
            DataWarning,
            stacklevel=2,
        )
    return out
