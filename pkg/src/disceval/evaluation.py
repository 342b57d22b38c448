"""Correlation of metric scores with human judgments.

Segment level uses Kendall's tau over pooled pairwise preferences; system
level turns segment judgments into win ratios, aggregates metric scores by
mean, and correlates per language pair with Spearman/Pearson before averaging.
A paired randomization test compares two metrics' tau on identical judgments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import ComputationError, DataWarning, InputError
from .scoring import MetricScoreTable
from .tuning import PairwiseComparison, RankingJudgment, expand_rankings

CONCORDANT = 1
DISCORDANT = -1
EXCLUDED = 0


class TiePolicy(Enum):
    """What a metric tie on a judged pair counts as.

    EXCLUDE drops the pair (the WMT12 reading); DISCORDANT penalizes it.
    Human ties are always excluded, upstream, at ranking expansion.
    """

    EXCLUDE = "exclude"
    DISCORDANT = "discordant"


@dataclass(frozen=True)
class TauConfig:
    metric_tie_policy: TiePolicy = TiePolicy.EXCLUDE


@dataclass
class CorrelationReport:
    metric: str
    statistic: str  # kendall_tau | spearman | pearson
    overall: float
    per_language: dict[str, Optional[float]]
    counts: dict[str, int] = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "statistic": self.statistic,
            "overall": self.overall,
            "per_language": self.per_language,
            "counts": self.counts,
            "details": self.details,
        }


def _check_coverage(
    scores: MetricScoreTable, metric: str, comparisons: Sequence[PairwiseComparison]
) -> None:
    missing = sorted(
        {
            (c.lang_pair, system, c.segment)
            for c in comparisons
            for system in (c.better, c.worse)
            if scores.get(metric, c.lang_pair, system, c.segment) is None
        }
    )
    if missing:
        preview = ", ".join(f"{lp}/{sys}/seg{seg}" for lp, sys, seg in missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise InputError(f"metric {metric!r} lacks scores for judged entries: {preview}{more}")


def pairwise_decisions(
    scores: MetricScoreTable,
    comparisons: Sequence[PairwiseComparison],
    metric: str,
    cfg: TauConfig = TauConfig(),
) -> np.ndarray:
    """Outcome per judged pair: +1 concordant, -1 discordant, 0 excluded."""
    _check_coverage(scores, metric, comparisons)
    decisions = np.empty(len(comparisons), dtype=np.int8)
    for i, comp in enumerate(comparisons):
        better = scores.get(metric, comp.lang_pair, comp.better, comp.segment)
        worse = scores.get(metric, comp.lang_pair, comp.worse, comp.segment)
        if better > worse:
            decisions[i] = CONCORDANT
        elif better < worse:
            decisions[i] = DISCORDANT
        else:
            decisions[i] = (
                EXCLUDED if cfg.metric_tie_policy is TiePolicy.EXCLUDE else DISCORDANT
            )
    return decisions


def _tau_from_counts(concordant: int, discordant: int) -> Optional[float]:
    decided = concordant + discordant
    if decided == 0:
        return None
    return (concordant - discordant) / decided


def kendall_tau(
    scores: MetricScoreTable,
    judgments: Sequence[RankingJudgment],
    metric: str,
    cfg: TauConfig = TauConfig(),
) -> CorrelationReport:
    """Segment-level Kendall's tau, pooled over all pairwise judgments, with a
    per-language breakdown."""
    comparisons = expand_rankings(judgments, mode="test")
    decisions = pairwise_decisions(scores, comparisons, metric, cfg)

    per_language: dict[str, Optional[float]] = {}
    lang_counts: dict[str, dict[str, int]] = {}
    for lang_pair in sorted({c.lang_pair for c in comparisons}):
        idx = [i for i, c in enumerate(comparisons) if c.lang_pair == lang_pair]
        sub = decisions[idx]
        c = int(np.sum(sub == CONCORDANT))
        d = int(np.sum(sub == DISCORDANT))
        e = int(np.sum(sub == EXCLUDED))
        lang_counts[lang_pair] = {"concordant": c, "discordant": d, "excluded": e}
        per_language[lang_pair] = _tau_from_counts(c, d)

    concordant = int(np.sum(decisions == CONCORDANT))
    discordant = int(np.sum(decisions == DISCORDANT))
    excluded = int(np.sum(decisions == EXCLUDED))
    pooled = _tau_from_counts(concordant, discordant)
    if pooled is None:
        raise ComputationError(f"no usable pairs for metric {metric!r} (all tied or excluded)")
    return CorrelationReport(
        metric=metric,
        statistic="kendall_tau",
        overall=pooled,
        per_language=per_language,
        counts={"concordant": concordant, "discordant": discordant, "excluded": excluded},
        details={
            "tie_policy": cfg.metric_tie_policy.value,
            "per_language_counts": lang_counts,
        },
    )


def human_system_scores(
    judgments: Sequence[RankingJudgment],
) -> dict[tuple[str, str], float]:
    """Win ratio (ignoring ties) per (lang_pair, system) from segment judgments."""
    mentioned = {
        (j.lang_pair, system) for j in judgments for system, _ in j.ranking
    }
    wins: dict[tuple[str, str], int] = {key: 0 for key in mentioned}
    losses: dict[tuple[str, str], int] = {key: 0 for key in mentioned}
    for comp in expand_rankings(judgments, mode="test"):
        wins[(comp.lang_pair, comp.better)] += 1
        losses[(comp.lang_pair, comp.worse)] += 1

    result = {}
    for key in sorted(mentioned):
        decided = wins[key] + losses[key]
        if decided == 0:
            raise ComputationError(
                f"system {key[1]!r} ({key[0]}) has no non-tied comparisons"
            )
        result[key] = wins[key] / decided
    return result


def metric_system_scores(
    scores: MetricScoreTable, metric: Optional[str] = None
) -> dict[tuple[str, str], float]:
    """Mean segment score per (lang_pair, system)."""
    metrics = scores.metrics()
    if metric is None:
        if len(metrics) != 1:
            raise InputError(f"table holds {len(metrics)} metrics; name one explicitly")
        metric = metrics[0]
    sums: dict[tuple[str, str], float] = {}
    counts: dict[tuple[str, str], int] = {}
    for (m, lang_pair, system, _), value in scores.scores.items():
        if m != metric:
            continue
        key = (lang_pair, system)
        sums[key] = sums.get(key, 0.0) + value
        counts[key] = counts.get(key, 0) + 1
    if not sums:
        raise InputError(f"no scores for metric {metric!r}")
    return {key: sums[key] / counts[key] for key in sorted(sums)}


def _strict_ranks(values: Sequence[float], side: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if len(np.unique(arr)) != len(arr):
        raise ComputationError(f"tied {side} scores; strict Spearman requires distinct ranks")
    ranks = np.empty(len(arr))
    ranks[np.argsort(arr, kind="stable")] = np.arange(1, len(arr) + 1)
    return ranks


def _average_ranks(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr))
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(human: Sequence[float], metric: Sequence[float], strict: bool = True) -> float:
    """Rank correlation via the classic difference-of-ranks formula.

    That formula needs distinct ranks on both sides; on ties, strict mode
    raises while lenient mode warns and falls back to Pearson over average
    ranks.
    """
    n = len(human)
    if n != len(metric):
        raise InputError(f"length mismatch: {n} vs {len(metric)}")
    if n < 2:
        raise ComputationError("spearman needs at least two systems")
    has_ties = len(set(human)) != n or len(set(metric)) != n
    if not has_ties:
        rh = _strict_ranks(human, "human")
        rm = _strict_ranks(metric, "metric")
        d = rh - rm
        return 1.0 - 6.0 * float(d @ d) / (n * (n * n - 1))
    if strict:
        raise ComputationError("tied scores; strict Spearman requires distinct ranks")
    warnings.warn("tied scores; using Pearson over average ranks", DataWarning, stacklevel=2)
    return pearson(_average_ranks(human), _average_ranks(metric))


def pearson(human: Sequence[float], metric: Sequence[float]) -> float:
    h = np.asarray(human, dtype=float)
    m = np.asarray(metric, dtype=float)
    if len(h) != len(m):
        raise InputError(f"length mismatch: {len(h)} vs {len(m)}")
    if len(h) < 2:
        raise ComputationError("pearson needs at least two systems")
    hc = h - h.mean()
    mc = m - m.mean()
    denom = float(np.sqrt(hc @ hc) * np.sqrt(mc @ mc))
    if denom == 0.0:
        raise ComputationError("undefined correlation: constant score vector")
    return float(hc @ mc) / denom


def system_level_report(
    scores: MetricScoreTable,
    judgments: Sequence[RankingJudgment],
    metric: str,
    which: str = "both",
    strict_spearman: bool = False,
) -> dict[str, CorrelationReport]:
    """Per-language system-level correlations, averaged across language pairs."""
    if which not in ("spearman", "pearson", "both"):
        raise InputError(f"which must be spearman|pearson|both, got {which!r}")
    human = human_system_scores(judgments)
    metric_means = metric_system_scores(scores.restrict(metric), metric)

    lang_pairs = sorted({lp for lp, _ in human})
    stats = ["spearman", "pearson"] if which == "both" else [which]
    per_language: dict[str, dict[str, float]] = {s: {} for s in stats}
    for lang_pair in lang_pairs:
        systems = sorted({sys for lp, sys in human if lp == lang_pair})
        if len(systems) < 2:
            raise InputError(f"language pair {lang_pair!r} has fewer than 2 judged systems")
        missing = [s for s in systems if (lang_pair, s) not in metric_means]
        if missing:
            raise InputError(f"metric {metric!r} lacks scores for systems {missing} ({lang_pair})")
        h = [human[(lang_pair, s)] for s in systems]
        m = [metric_means[(lang_pair, s)] for s in systems]
        if "spearman" in stats:
            per_language["spearman"][lang_pair] = spearman(h, m, strict=strict_spearman)
        if "pearson" in stats:
            per_language["pearson"][lang_pair] = pearson(h, m)

    reports = {}
    for stat in stats:
        values = per_language[stat]
        reports[stat] = CorrelationReport(
            metric=metric,
            statistic=stat,
            overall=float(np.mean(list(values.values()))),
            per_language=dict(values),
            details={"spearman_mode": "strict" if strict_spearman else "lenient"}
            if stat == "spearman"
            else {},
        )
    return reports


def break_ties(
    segment_scores: MetricScoreTable,
    system_scores: dict[tuple[str, str], float],
    epsilon: float = 1e-6,
) -> MetricScoreTable:
    """Perturb every segment score by epsilon times its system's global score,
    so segment ties between systems resolve toward the globally better system.

    Post-processing only; it is not part of any metric.
    """
    if not epsilon > 0.0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    out = MetricScoreTable()
    for (metric, lang_pair, system, segment), value in segment_scores.scores.items():
        if (lang_pair, system) not in system_scores:
            raise InputError(f"no system-level score for {(lang_pair, system)}")
        out.add(metric, lang_pair, system, segment,
                value + epsilon * system_scores[(lang_pair, system)])
    return out


def _tau_rows(decisions: np.ndarray) -> np.ndarray:
    sums = decisions.sum(axis=1, dtype=np.int64)
    decided = np.abs(decisions).sum(axis=1, dtype=np.int64)
    return np.divide(sums, decided, out=np.zeros(len(sums)), where=decided > 0)


def randomization_test(
    decisions_a: Sequence[int],
    decisions_b: Sequence[int],
    rounds: int = 10000,
    seed: int = 0,
) -> float:
    """Paired approximate randomization over per-judgment outcomes.

    Each round independently swaps the two metrics' outcomes per judgment with
    probability 1/2; the p-value is the add-one-smoothed fraction of rounds
    whose absolute tau difference reaches the observed one.
    """
    a = np.asarray(decisions_a, dtype=np.int8)
    b = np.asarray(decisions_b, dtype=np.int8)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError(f"decision vectors must match in length: {a.shape} vs {b.shape}")
    if rounds < 1:
        raise InputError(f"rounds must be >= 1, got {rounds}")

    observed = abs(float(_tau_rows(a[None, :])[0]) - float(_tau_rows(b[None, :])[0]))
    rng = np.random.default_rng(seed)
    n = len(a)
    at_least = 0
    chunk = max(1, min(rounds, 4_000_000 // max(1, n)))
    done = 0
    while done < rounds:
        r = min(chunk, rounds - done)
        swap = rng.random((r, n)) < 0.5
        sa = np.where(swap, b[None, :], a[None, :])
        sb = np.where(swap, a[None, :], b[None, :])
        deltas = np.abs(_tau_rows(sa) - _tau_rows(sb))
        at_least += int(np.sum(deltas >= observed))
        done += r
    return (1 + at_least) / (1 + rounds)
