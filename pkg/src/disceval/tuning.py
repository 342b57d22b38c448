"""Learning interpolation weights for metric combinations from human rankings.

Five-way relative rankings expand into pairwise preferences; a logistic model
over normalized metric-score differences is fit by maximizing the L2-penalized
log-likelihood, with the regularization strength chosen by 5-fold
cross-validation.  No bias term is used: the objective is antisymmetric under
swapping the two translations of a pair, and a bias would break that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ComputationError, InputError
from .scoring import MetricScoreTable, NormalizationRanges, minmax_normalize

DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0)


@dataclass(frozen=True)
class RankingJudgment:
    """One judge's relative ranking of 2-5 system outputs for one segment."""

    lang_pair: str
    segment: int
    judge: str
    ranking: tuple[tuple[str, int], ...]  # (system, rank 1..5), ties allowed

    def __post_init__(self) -> None:
        if not (2 <= len(self.ranking) <= 5):
            raise InputError(
                f"judgment needs 2-5 systems, got {len(self.ranking)} "
                f"({self.lang_pair} seg {self.segment})"
            )
        systems = [s for s, _ in self.ranking]
        if len(set(systems)) != len(systems):
            raise InputError(f"repeated system in judgment ({self.lang_pair} seg {self.segment})")
        for system, rank in self.ranking:
            if not (1 <= rank <= 5):
                raise InputError(f"rank {rank} out of 1..5 for system {system!r}")


@dataclass(frozen=True)
class PairwiseComparison:
    """A directed human preference: `better` beat `worse` on this segment."""

    lang_pair: str
    segment: int
    better: str
    worse: str


@dataclass(frozen=True)
class PairwiseExample:
    feature_diff: np.ndarray  # u(sys1) - u(sys2) over the model's metrics
    label: int  # 1 if sys1 better, else 0
    provenance: tuple[str, int, str, str]  # (lang_pair, segment, sys1, sys2)


def load_judgments(path) -> list[RankingJudgment]:
    """Read `lang_pair  segment  judge  system:rank,...` TSV lines."""
    judgments = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise InputError(f"{path}:{lineno}: expected 4 tab-separated fields")
            lang_pair, seg_text, judge, ranking_text = parts
            try:
                segment = int(seg_text)
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: bad segment id {seg_text!r}") from exc
            ranking = []
            for item in ranking_text.split(","):
                system, _, rank_text = item.partition(":")
                try:
                    rank = int(rank_text)
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: bad rank item {item!r}") from exc
                ranking.append((system, rank))
            try:
                judgments.append(
                    RankingJudgment(lang_pair, segment, judge, tuple(ranking))
                )
            except InputError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
    return judgments


def expand_rankings(
    judgments: Iterable[RankingJudgment], mode: str = "train"
) -> list[PairwiseComparison]:
    """Turn k-way rankings into C(k,2) directed comparisons.

    Pairs the judge ranked equal are skipped in both modes.  Training mode
    further collapses repeated identical votes into one and drops pairs whose
    better/worse vote counts cancel out; test mode keeps every comparison so
    results stay comparable with official scoring.
    """
    if mode not in ("train", "test"):
        raise InputError(f"mode must be 'train' or 'test', got {mode!r}")

    raw: list[PairwiseComparison] = []
    for judgment in judgments:
        for (sys_a, rank_a), (sys_b, rank_b) in combinations(judgment.ranking, 2):
            if rank_a == rank_b:
                continue
            better, worse = (sys_a, sys_b) if rank_a < rank_b else (sys_b, sys_a)
            raw.append(PairwiseComparison(judgment.lang_pair, judgment.segment, better, worse))
    if mode == "test":
        return raw

    votes: dict[tuple[str, int, str, str], int] = {}
    for comp in raw:
        key = (comp.lang_pair, comp.segment, comp.better, comp.worse)
        votes[key] = votes.get(key, 0) + 1

    kept: list[PairwiseComparison] = []
    for (lang_pair, segment, better, worse), count in sorted(votes.items()):
        reverse = votes.get((lang_pair, segment, worse, better), 0)
        if count == reverse:
            continue  # the votes cancel; pair carries no signal
        kept.append(PairwiseComparison(lang_pair, segment, better, worse))
    return kept


def build_examples(
    comparisons: Iterable[PairwiseComparison],
    table: MetricScoreTable,
    metrics: Sequence[str],
) -> list[PairwiseExample]:
    """One y=1 example per comparison (mirrored duplicates are redundant)."""
    examples = []
    for comp in comparisons:
        diff = np.empty(len(metrics))
        for i, metric in enumerate(metrics):
            u1 = table.get(metric, comp.lang_pair, comp.better, comp.segment)
            u2 = table.get(metric, comp.lang_pair, comp.worse, comp.segment)
            if u1 is None or u2 is None:
                missing = comp.better if u1 is None else comp.worse
                raise InputError(
                    f"no {metric!r} score for system {missing!r} "
                    f"({comp.lang_pair} seg {comp.segment})"
                )
            diff[i] = u1 - u2
        examples.append(
            PairwiseExample(diff, 1, (comp.lang_pair, comp.segment, comp.better, comp.worse))
        )
    return examples


def _pack(examples: Sequence[PairwiseExample]) -> tuple[np.ndarray, np.ndarray]:
    diffs = np.stack([ex.feature_diff for ex in examples])
    labels = np.array([ex.label for ex in examples], dtype=np.int64)
    return diffs, labels


def _softplus(t: np.ndarray) -> np.ndarray:
    # log(1 + e^t), overflow-safe and bitwise symmetric in the log1p part.
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def _sigmoid(t: np.ndarray) -> np.ndarray:
    a = np.exp(-np.abs(t))
    return np.where(t >= 0, 1.0 / (1.0 + a), a / (1.0 + a))


def _nll_and_grad(
    w: np.ndarray, diffs: np.ndarray, labels: np.ndarray, lam: float
) -> tuple[float, np.ndarray]:
    z = diffs @ w
    pos = labels == 1
    losses = np.where(pos, _softplus(-z), _softplus(z))
    value = float(np.sum(losses)) + lam * float(w @ w)
    # d/dz of the loss; written so that flipping labels negates it bitwise,
    # which keeps the learned weights exactly antisymmetric under label flips.
    coeff = np.where(pos, -_sigmoid(-z), _sigmoid(z))
    grad = diffs.T @ coeff + 2.0 * lam * w
    return value, grad


def objective_and_gradient(
    w: np.ndarray, examples: Sequence[PairwiseExample], lam: float
) -> tuple[float, np.ndarray]:
    """Penalized negative log-likelihood of the pairwise preferences and its
    analytic gradient (minimize this; equivalently maximize LL - lam*||w||^2)."""
    if not examples:
        raise InputError("objective needs at least one example")
    diffs, labels = _pack(examples)
    return _nll_and_grad(np.asarray(w, dtype=float), diffs, labels, lam)


@dataclass
class TrainResult:
    weights: np.ndarray
    iterations: int
    converged: bool


def train_detailed(
    examples: Sequence[PairwiseExample],
    lam: float,
    max_iters: int = 500,
    grad_tol: float = 1e-8,
    w0: Optional[np.ndarray] = None,
) -> TrainResult:
    """Damped Newton minimization of the penalized NLL.

    The objective is convex (strictly, for lam > 0), so the optimum is unique;
    Newton steps with an Armijo backtracking line search reach it in a handful
    of iterations and are fully deterministic.
    """
    if not examples:
        raise InputError("cannot train on an empty example set")
    diffs, labels = _pack(examples)
    n_features = diffs.shape[1]
    w = np.zeros(n_features) if w0 is None else np.asarray(w0, dtype=float).copy()

    value, grad = _nll_and_grad(w, diffs, labels, lam)
    iterations = 0
    converged = False
    for iterations in range(1, max_iters + 1):
        if np.max(np.abs(grad)) < grad_tol:
            converged = True
            iterations -= 1
            break
        z = diffs @ w
        a = np.exp(-np.abs(z))
        hess_weights = a / ((1.0 + a) * (1.0 + a))  # sigma(z) * sigma(-z)
        hessian = diffs.T @ (hess_weights[:, None] * diffs)
        hessian[np.diag_indices_from(hessian)] += 2.0 * lam
        try:
            step = np.linalg.solve(hessian, -grad)
        except np.linalg.LinAlgError:
            step = -grad
        descent = float(grad @ step)
        if descent >= 0.0:
            step = -grad
            descent = float(grad @ step)

        alpha = 1.0
        while alpha > 1e-14:
            candidate = w + alpha * step
            cand_value, cand_grad = _nll_and_grad(candidate, diffs, labels, lam)
            if cand_value <= value + 1e-4 * alpha * descent:
                w, value, grad = candidate, cand_value, cand_grad
                break
            alpha *= 0.5
        else:
            break  # no further progress possible at machine precision
    else:
        if np.max(np.abs(grad)) < grad_tol:
            converged = True
    return TrainResult(weights=w, iterations=iterations, converged=converged)


def train(
    examples: Sequence[PairwiseExample],
    lam: float,
    max_iters: int = 500,
    grad_tol: float = 1e-8,
    w0: Optional[np.ndarray] = None,
) -> np.ndarray:
    return train_detailed(examples, lam, max_iters, grad_tol, w0).weights


def _pairwise_accuracy(w: np.ndarray, examples: Sequence[PairwiseExample]) -> float:
    diffs, labels = _pack(examples)
    z = diffs @ w
    correct = np.where(z == 0.0, 0.5, ((z > 0) == (labels == 1)).astype(float))
    return float(np.mean(correct))


def _cv_folds(
    examples: Sequence[PairwiseExample], folds: int, seed: int
) -> list[np.ndarray]:
    """Deterministic fold assignment, stratified by language pair."""
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(examples), dtype=np.int64)
    by_lang: dict[str, list[int]] = {}
    for i, ex in enumerate(examples):
        by_lang.setdefault(ex.provenance[0], []).append(i)
    offset = 0
    for lang_pair in sorted(by_lang):
        indices = np.array(by_lang[lang_pair])
        rng.shuffle(indices)
        for j, idx in enumerate(indices):
            assignment[idx] = (offset + j) % folds
        offset += len(indices)
    return [np.flatnonzero(assignment == f) for f in range(folds)]


def select_lambda_detailed(
    examples: Sequence[PairwiseExample],
    grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    folds: int = 5,
    seed: int = 0,
) -> tuple[float, dict[float, float]]:
    """Cross-validated choice of the regularization strength.

    Picks the grid value with the best mean held-out pairwise accuracy,
    breaking ties toward stronger regularization.
    """
    if not grid:
        raise InputError("lambda grid is empty")
    if len(examples) < folds:
        raise InputError(f"{len(examples)} examples cannot fill {folds} folds")
    fold_indices = _cv_folds(examples, folds, seed)
    accuracies: dict[float, float] = {}
    for lam in grid:
        scores = []
        for held_out in fold_indices:
            if len(held_out) == 0:
                continue
            mask = np.ones(len(examples), dtype=bool)
            mask[held_out] = False
            train_set = [examples[i] for i in np.flatnonzero(mask)]
            test_set = [examples[i] for i in held_out]
            w = train(train_set, lam)
            scores.append(_pairwise_accuracy(w, test_set))
        accuracies[lam] = float(np.mean(scores))
    best = max(sorted(grid), key=lambda lam: (accuracies[lam], lam))
    return best, accuracies


def select_lambda(
    examples: Sequence[PairwiseExample],
    grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    folds: int = 5,
    seed: int = 0,
) -> float:
    return select_lambda_detailed(examples, grid, folds, seed)[0]


@dataclass
class CombinedMetricModel:
    """Learned linear combination: metric names, weights, and the score ranges
    they were normalized with.  No bias term."""

    metrics: list[str]
    weights: list[float]
    ranges: NormalizationRanges
    lam: float
    metadata: dict = field(default_factory=dict)

    @classmethod
    def uniform(cls, metrics: Sequence[str], ranges: NormalizationRanges) -> "CombinedMetricModel":
        n = len(metrics)
        if n == 0:
            raise InputError("uniform model needs at least one metric")
        return cls(
            metrics=list(metrics),
            weights=[1.0 / n] * n,
            ranges=ranges,
            lam=0.0,
            metadata={"mode": "uniform"},
        )

    def to_json(self) -> str:
        payload = {
            "metrics": self.metrics,
            "weights": self.weights,
            "ranges": {m: list(r) for m, r in sorted(self.ranges.items())},
            "lambda": self.lam,
            "metadata": self.metadata,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CombinedMetricModel":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed model JSON: {exc}") from exc
        try:
            return cls(
                metrics=list(payload["metrics"]),
                weights=[float(x) for x in payload["weights"]],
                ranges={m: (float(lo), float(hi)) for m, (lo, hi) in payload["ranges"].items()},
                lam=float(payload["lambda"]),
                metadata=dict(payload.get("metadata", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"model JSON missing or malformed field: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "CombinedMetricModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def tune_model(
    raw_scores: MetricScoreTable,
    judgments: Sequence[RankingJudgment],
    grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    folds: int = 5,
    seed: int = 0,
    datasets: Sequence[str] = (),
) -> CombinedMetricModel:
    """Full tuning pipeline: normalize, expand, cross-validate, fit."""
    comparisons = expand_rankings(judgments, mode="train")
    if not comparisons:
        raise ComputationError("no usable training pairs after tie and repetition filtering")
    normalized, ranges = minmax_normalize(raw_scores)
    metrics = normalized.metrics()
    examples = build_examples(comparisons, normalized, metrics)
    lam, accuracies = select_lambda_detailed(examples, grid, folds, seed)
    result = train_detailed(examples, lam)
    return CombinedMetricModel(
        metrics=metrics,
        weights=[float(x) for x in result.weights],
        ranges=ranges,
        lam=lam,
        metadata={
            "seed": seed,
            "cv_folds": folds,
            "cv_stratification": "lang_pair",
            "cv_accuracy": {f"{k:g}": v for k, v in sorted(accuracies.items())},
            "optimizer": "damped-newton",
            "optimizer_iterations": result.iterations,
            "converged": result.converged,
            "n_examples": len(examples),
            "datasets": list(datasets),
        },
    )
