"""Command-line front end: score, tune, evaluate, analyze, significance.

Every command is a pure function of its input files, configuration, and seed;
repeated runs write byte-identical outputs.  Options may come from a flat
key=value config file (--config); explicit flags win over the file.

Exit codes: 0 success, 1 computation error, 2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis
from .errors import DiscevalError, InputError
from .evaluation import (
    TauConfig,
    TiePolicy,
    break_ties,
    kendall_tau,
    metric_system_scores,
    pairwise_decisions,
    randomization_test,
    system_level_report,
)
from .kernel import KernelConfig
from .representations import AblationKind, RepresentationKind
from .scoring import (
    MetricScoreTable,
    combine,
    load_external_scores,
    minmax_normalize,
    save_scores,
    score_dr_metrics,
)
from .trees import load_tree_file
from .tuning import (
    DEFAULT_LAMBDA_GRID,
    CombinedMetricModel,
    expand_rankings,
    load_judgments,
    tune_model,
)


def _read_config(path: Optional[str]) -> dict[str, str]:
    if path is None:
        return {}
    config: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise InputError(f"{path}:{lineno}: expected key=value")
            config[key.strip()] = value.strip()
    return config


def _opt(args_value, config: dict, key: str, default=None, cast=None, multi=False):
    """Flag value if given, else config-file value, else default."""
    if args_value is not None and args_value != []:
        return args_value
    if key in config:
        raw = config[key]
        if multi:
            return [cast(part) if cast else part for part in raw.split(",") if part]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes", "on")
        return cast(raw) if cast else raw
    return default


def _require(value, flag: str):
    if value is None:
        raise InputError(f"{flag} is required")
    return value


def _parse_hyps(items: Sequence[str]) -> dict[str, str]:
    hyps = {}
    for item in items:
        system, sep, path = item.partition("=")
        if not sep or not system or not path:
            raise InputError(f"--hyps expects SYSTEM=PATH, got {item!r}")
        if system in hyps:
            raise InputError(f"system {system!r} given twice in --hyps")
        hyps[system] = path
    return hyps


def _load_score_files(paths: Sequence[str]) -> MetricScoreTable:
    if not paths:
        raise InputError("--scores is required")
    table = MetricScoreTable()
    for path in paths:
        table.merge(load_external_scores(path))
    return table


def _reps(value: Optional[str]) -> tuple[RepresentationKind, ...]:
    if value is None or value == "all":
        return tuple(RepresentationKind)
    kinds = []
    for name in value.split(","):
        try:
            kinds.append(RepresentationKind(name))
        except ValueError:
            valid = ", ".join(k.value for k in RepresentationKind)
            raise InputError(f"unknown representation {name!r}; valid: {valid}, all") from None
    return tuple(kinds)


def _ablation(value: Optional[str]) -> AblationKind:
    if value is None:
        return AblationKind.FULL
    try:
        return AblationKind(value)
    except ValueError:
        valid = ", ".join(k.value for k in AblationKind)
        raise InputError(f"unknown ablation {value!r}; valid: {valid}") from None


def _tie_policies(value: Optional[str]) -> list[TiePolicy]:
    if value is None or value == "exclude":
        return [TiePolicy.EXCLUDE]
    if value == "discordant":
        return [TiePolicy.DISCORDANT]
    if value == "both":
        return [TiePolicy.EXCLUDE, TiePolicy.DISCORDANT]
    raise InputError(f"unknown tie policy {value!r}; valid: exclude, discordant, both")


def _write_json(payload: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_text(text: str, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _sibling(out: Path, suffix: str, extension: str) -> Path:
    return out.with_name(out.stem + suffix + extension)


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [
        max(len(str(headers[i])), *(len(str(row[i])) for row in rows)) if rows else len(str(headers[i]))
        for i in range(len(headers))
    ]
    def line(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(headers), line("-" * w for w in widths)]
    out.extend(line(row) for row in rows)
    return "\n".join(out) + "\n"


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


# ---------------------------------------------------------------- score

def cmd_score(args: argparse.Namespace, config: dict) -> int:
    refs_path = _require(_opt(args.refs, config, "refs"), "--refs")
    hyp_items = _opt(args.hyps, config, "hyps", default=[], multi=True)
    if not hyp_items:
        raise InputError("--hyps is required (SYSTEM=PATH)")
    lang_pair = _opt(args.lang_pair, config, "lang-pair", default="xx-en")
    strict = bool(_opt(args.strict, config, "strict", default=False, cast=bool))
    decay = float(_opt(args.decay, config, "decay", default=1.0, cast=float))
    kinds = _reps(_opt(args.rep, config, "rep"))
    ablation = _ablation(_opt(args.ablation, config, "ablation"))
    out = Path(_require(_opt(args.out, config, "out"), "--out"))

    kernel_config = KernelConfig(decay_weight=decay)
    ref_trees = load_tree_file(refs_path, strict=strict)
    table = MetricScoreTable()
    for system, path in sorted(_parse_hyps(hyp_items).items()):
        hyp_trees = load_tree_file(path, strict=strict)
        table.merge(
            score_dr_metrics(
                ref_trees,
                hyp_trees,
                kinds=kinds,
                ablation=ablation,
                lang_pair=lang_pair,
                system=system,
                config=kernel_config,
            )
        )
    save_scores(table, out)
    print(f"wrote {len(table.scores)} scores to {out}")
    return 0


# ---------------------------------------------------------------- tune

def cmd_tune(args: argparse.Namespace, config: dict) -> int:
    score_paths = _opt(args.scores, config, "scores", default=[], multi=True)
    judgments_path = _require(_opt(args.judgments, config, "judgments"), "--judgments")
    seed = _opt(args.seed, config, "seed", cast=int)
    seed = int(_require(seed, "--seed"))
    grid = _opt(args.lambda_grid, config, "lambda-grid", cast=float, multi=True)
    if grid is None:
        grid = list(DEFAULT_LAMBDA_GRID)
    elif isinstance(grid, str):
        grid = [float(x) for x in grid.split(",")]
    folds = int(_opt(args.folds, config, "folds", default=5, cast=int))
    out = Path(_require(_opt(args.out, config, "out"), "--out"))
    render = bool(_opt(args.figures, config, "figures", default=False, cast=bool))

    table = _load_score_files(score_paths)
    judgments = load_judgments(judgments_path)
    if not judgments:
        raise InputError(f"no judgments found in {judgments_path}")
    model = tune_model(
        table,
        judgments,
        grid=grid,
        folds=folds,
        seed=seed,
        datasets=[Path(p).name for p in score_paths],
    )
    model.save(out)
    if render:
        from . import figures

        figures.model_weights_figure(json.loads(model.to_json()), _sibling(out, "_weights", ".png"))
    print(f"tuned {len(model.metrics)} metric weights (lambda={model.lam:g}) -> {out}")
    return 0


# ---------------------------------------------------------------- evaluate

def _combined_table(table: MetricScoreTable, model: CombinedMetricModel) -> MetricScoreTable:
    sub = MetricScoreTable(
        {k: v for k, v in table.scores.items() if k[0] in set(model.metrics)}
    )
    normalized, _ = minmax_normalize(sub, dict(model.ranges))
    return combine(normalized, model)


def cmd_evaluate(args: argparse.Namespace, config: dict) -> int:
    score_paths = _opt(args.scores, config, "scores", default=[], multi=True)
    judgments_path = _require(_opt(args.judgments, config, "judgments"), "--judgments")
    model_path = _opt(args.model, config, "model")
    uniform = _opt(args.uniform, config, "uniform")
    policies = _tie_policies(_opt(args.tie_policy, config, "tie-policy"))
    epsilon = _opt(args.epsilon, config, "epsilon", cast=float)
    level = _opt(args.level, config, "level", default="both")
    if level not in ("segment", "system", "both"):
        raise InputError(f"--level must be segment|system|both, got {level!r}")
    metrics_wanted = _opt(args.metric, config, "metric", default=[], multi=True)
    out = Path(_require(_opt(args.out, config, "out"), "--out"))
    render = bool(_opt(args.figures, config, "figures", default=False, cast=bool))

    table = _load_score_files(score_paths)
    judgments = load_judgments(judgments_path)
    if model_path and uniform:
        raise InputError("give either --model or --uniform, not both")
    if model_path:
        table.merge(_combined_table(table, CombinedMetricModel.load(model_path)))
    elif uniform:
        wanted = [m for m in uniform.split(",") if m]
        sub = MetricScoreTable({k: v for k, v in table.scores.items() if k[0] in set(wanted)})
        missing = sorted(set(wanted) - set(sub.metrics()))
        if missing:
            raise InputError(f"--uniform metrics missing from scores: {missing}")
        normalized, ranges = minmax_normalize(sub)
        table.merge(combine(normalized, CombinedMetricModel.uniform(wanted, ranges)))

    metrics = metrics_wanted or table.metrics()
    available = set(table.metrics())
    unknown = sorted(set(metrics) - available)
    if unknown:
        raise InputError(f"metrics not in score table: {unknown}")

    report: dict = {
        "config": {
            "tie_policies": [p.value for p in policies],
            "epsilon": epsilon,
            "level": level,
        },
        "metrics": {},
    }
    for metric in sorted(metrics):
        entry: dict = {}
        metric_table = table.restrict(metric)
        if epsilon is not None:
            tau_table = break_ties(
                metric_table, metric_system_scores(metric_table, metric), epsilon
            )
        else:
            tau_table = metric_table
        if level in ("segment", "both"):
            entry["segment_level"] = {
                policy.value: kendall_tau(
                    tau_table, judgments, metric, TauConfig(policy)
                ).to_dict()
                for policy in policies
            }
        if level in ("system", "both"):
            entry["system_level"] = {
                stat: rep.to_dict()
                for stat, rep in system_level_report(
                    metric_table, judgments, metric, which="both"
                ).items()
            }
        report["metrics"][metric] = entry

    _write_json(report, out)
    _write_text(_evaluate_table(report), _sibling(out, "", ".txt"))
    if render:
        from . import figures

        if level in ("segment", "both"):
            figures.segment_correlation_figure(report, _sibling(out, "_segment", ".png"))
        if level in ("system", "both"):
            figures.system_correlation_figure(report, _sibling(out, "_system", ".png"))
    print(f"evaluated {len(metrics)} metric(s) -> {out}")
    return 0


def _evaluate_table(report: dict) -> str:
    policies = report["config"]["tie_policies"]
    headers = ["metric"]
    headers += [f"tau[{p}]" for p in policies if _has_segment(report)]
    if _has_system(report):
        headers += ["spearman", "pearson"]
    rows = []
    for metric, entry in sorted(report["metrics"].items()):
        row = [metric]
        if _has_segment(report):
            seg = entry.get("segment_level", {})
            row += [_fmt(seg[p]["overall"]) if p in seg else "n/a" for p in policies]
        if _has_system(report):
            sys_level = entry.get("system_level", {})
            row.append(_fmt(sys_level.get("spearman", {}).get("overall")))
            row.append(_fmt(sys_level.get("pearson", {}).get("overall")))
        rows.append(row)
    return format_table(headers, rows)


def _has_segment(report: dict) -> bool:
    return report["config"]["level"] in ("segment", "both")


def _has_system(report: dict) -> bool:
    return report["config"]["level"] in ("system", "both")


# ---------------------------------------------------------------- analyze

def cmd_analyze(args: argparse.Namespace, config: dict) -> int:
    refs_path = _require(_opt(args.refs, config, "refs"), "--refs")
    hyp_items = _opt(args.hyps, config, "hyps", default=[], multi=True)
    if not hyp_items:
        raise InputError("--hyps is required (SYSTEM=PATH)")
    judgments_path = _require(_opt(args.judgments, config, "judgments"), "--judgments")
    lang_pair = _opt(args.lang_pair, config, "lang-pair", default="xx-en")
    k = int(_opt(args.k, config, "k", default=2, cast=int))
    strict = bool(_opt(args.strict, config, "strict", default=False, cast=bool))
    decay = float(_opt(args.decay, config, "decay", default=1.0, cast=float))
    out = Path(_require(_opt(args.out, config, "out"), "--out"))
    render = bool(_opt(args.figures, config, "figures", default=False, cast=bool))

    kernel_config = KernelConfig(decay_weight=decay)
    ref_trees = load_tree_file(refs_path, strict=strict)
    trees_by_system = {
        system: load_tree_file(path, strict=strict)
        for system, path in sorted(_parse_hyps(hyp_items).items())
    }
    judgments = [j for j in load_judgments(judgments_path) if j.lang_pair == lang_pair]
    if not judgments:
        raise InputError(f"no judgments for language pair {lang_pair!r}")

    sweep = MetricScoreTable()
    for system, hyp_trees in sorted(trees_by_system.items()):
        sweep.merge(
            analysis.ablation_sweep(
                ref_trees, hyp_trees, lang_pair=lang_pair, system=system, config=kernel_config
            )
        )
    save_scores(sweep, _sibling(out, "_ablation_scores", ".tsv"))

    ablation_corrs = {}
    for metric in sweep.metrics():
        reports = system_level_report(sweep, judgments, metric, which="both")
        ablation_corrs[metric] = {
            "spearman": reports["spearman"].overall,
            "pearson": reports["pearson"].overall,
        }

    spec = analysis.make_cohorts(judgments, lang_pair, ref_trees, k=k)
    cohorts = analysis.cohort_report(spec, trees_by_system)
    depth = analysis.depth_distribution(ref_trees).to_dict()

    report = {
        "lang_pair": lang_pair,
        "ablation_system_level": ablation_corrs,
        "depth_distribution": depth,
        "cohorts": cohorts,
    }
    _write_json(report, out)
    _write_text(_analyze_table(report), _sibling(out, "", ".txt"))
    if render:
        from . import figures

        figures.ablation_figure(ablation_corrs, _sibling(out, "_ablation", ".png"))
        figures.depth_distribution_figure(depth, _sibling(out, "_depth", ".png"))
        figures.label_distribution_figure(cohorts, _sibling(out, "_relations", ".png"))
        figures.cohort_f1_figure(cohorts, _sibling(out, "_cohort_f1", ".png"))
    print(f"analysis for {lang_pair} -> {out}")
    return 0


def _analyze_table(report: dict) -> str:
    sections = []
    rows = [
        [variant, _fmt(vals["spearman"]), _fmt(vals["pearson"])]
        for variant, vals in sorted(report["ablation_system_level"].items())
    ]
    sections.append("Ablation (system level)\n" + format_table(["variant", "spearman", "pearson"], rows))

    dd = report["depth_distribution"]
    rows = [[d, f"{dd['proportions'][d]:.4f}"] for d in sorted(dd["proportions"], key=int)]
    sections.append(
        "Reference tree depth (avg {:.4f}, min {}, max {}; EDUs avg {:.4f}, min {}, max {})\n".format(
            dd["depth"]["avg"], dd["depth"]["min"], dd["depth"]["max"],
            dd["edus"]["avg"], dd["edus"]["min"], dd["edus"]["max"],
        )
        + format_table(["depth", "proportion"], rows)
    )

    cohorts = report["cohorts"]
    rows = []
    for name in ("good", "bad"):
        cohort = cohorts["cohorts"][name]
        rows.append(
            [
                name,
                ",".join(cohort["systems"]),
                f"{cohort['relation_kl_to_gold']:.6f}",
                f"{cohort['relation_f1']['_micro']['f1']:.4f}",
                f"{cohort['nuclearity_f1']['_micro']['f1']:.4f}",
                f"{cohort['edu_f1']['f1']:.4f}",
                f"{cohort['depth_rmse']:.4f}",
            ]
        )
    sections.append(
        "Cohorts vs gold\n"
        + format_table(
            ["cohort", "systems", "rel-KL", "rel-F1", "nuc-F1", "edu-F1", "depth-RMSE"], rows
        )
    )
    return "\n".join(sections)


# ---------------------------------------------------------------- significance

def cmd_significance(args: argparse.Namespace, config: dict) -> int:
    score_paths = _opt(args.scores, config, "scores", default=[], multi=True)
    judgments_path = _require(_opt(args.judgments, config, "judgments"), "--judgments")
    metric_a = _require(_opt(args.metric_a, config, "metric-a"), "--metric-a")
    metric_b = _require(_opt(args.metric_b, config, "metric-b"), "--metric-b")
    policies = _tie_policies(_opt(args.tie_policy, config, "tie-policy"))
    if len(policies) != 1:
        raise InputError("significance needs a single tie policy (exclude or discordant)")
    rounds = int(_opt(args.rounds, config, "rounds", default=10000, cast=int))
    seed = _opt(args.seed, config, "seed", cast=int)
    seed = int(_require(seed, "--seed"))
    out = Path(_require(_opt(args.out, config, "out"), "--out"))

    table = _load_score_files(score_paths)
    judgments = load_judgments(judgments_path)
    cfg = TauConfig(policies[0])
    comparisons = expand_rankings(judgments, mode="test")
    decisions_a = pairwise_decisions(table, comparisons, metric_a, cfg)
    decisions_b = pairwise_decisions(table, comparisons, metric_b, cfg)
    tau_a = kendall_tau(table, judgments, metric_a, cfg).overall
    tau_b = kendall_tau(table, judgments, metric_b, cfg).overall
    p_value = randomization_test(decisions_a, decisions_b, rounds=rounds, seed=seed)

    report = {
        "metric_a": metric_a,
        "metric_b": metric_b,
        "tau_a": tau_a,
        "tau_b": tau_b,
        "abs_delta": abs(tau_a - tau_b),
        "p_value": p_value,
        "rounds": rounds,
        "seed": seed,
        "tie_policy": cfg.metric_tie_policy.value,
        "n_judged_pairs": int(len(comparisons)),
    }
    _write_json(report, out)
    _write_text(
        format_table(
            ["metric", "tau"],
            [[metric_a, _fmt(tau_a)], [metric_b, _fmt(tau_b)]],
        )
        + f"\n|delta tau| = {abs(tau_a - tau_b):.6f}, p = {p_value:.6g} "
        f"(paired randomization, R={rounds}, seed={seed})\n",
        _sibling(out, "", ".txt"),
    )
    print(f"p-value {p_value:.6g} -> {out}")
    return 0


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disceval",
        description="Discourse-tree similarity metrics for MT evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value config file; flags win")
        p.add_argument("--out", help="output path")

    p = sub.add_parser("score", help="score hypothesis trees against reference trees")
    add_common(p)
    p.add_argument("--refs", help="reference tree file (JSON lines)")
    p.add_argument("--hyps", action="append", metavar="SYSTEM=PATH",
                   help="hypothesis tree file; repeatable")
    p.add_argument("--lang-pair", dest="lang_pair")
    p.add_argument("--rep", help="comma list of representations, or 'all'")
    p.add_argument("--ablation", help="full|norel|nonuc|nonucnorel|nodiscourse")
    p.add_argument("--strict", action="store_const", const=True, default=None,
                   help="strict tree validation")
    p.add_argument("--decay", type=float, help="kernel decay weight (default 1.0)")

    p = sub.add_parser("tune", help="learn combination weights from judgments")
    add_common(p)
    p.add_argument("--scores", action="append", help="score TSV; repeatable")
    p.add_argument("--judgments")
    p.add_argument("--seed", type=int)
    p.add_argument("--lambda-grid", dest="lambda_grid", help="comma list of lambda values")
    p.add_argument("--folds", type=int)
    p.add_argument("--figures", action="store_const", const=True, default=None)

    p = sub.add_parser("evaluate", help="correlate metric scores with judgments")
    add_common(p)
    p.add_argument("--scores", action="append", help="score TSV; repeatable")
    p.add_argument("--judgments")
    p.add_argument("--metric", action="append", help="metric to evaluate; repeatable")
    p.add_argument("--model", help="model JSON: also evaluate the combined metric")
    p.add_argument("--uniform", help="comma list of metrics for a uniform combination")
    p.add_argument("--tie-policy", dest="tie_policy", help="exclude|discordant|both")
    p.add_argument("--epsilon", type=float,
                   help="tie-breaking perturbation (enables break-ties post-processing)")
    p.add_argument("--level", help="segment|system|both")
    p.add_argument("--figures", action="store_const", const=True, default=None)

    p = sub.add_parser("analyze", help="ablations, tree statistics, cohort comparison")
    add_common(p)
    p.add_argument("--refs")
    p.add_argument("--hyps", action="append", metavar="SYSTEM=PATH")
    p.add_argument("--judgments")
    p.add_argument("--lang-pair", dest="lang_pair")
    p.add_argument("--k", type=int, help="cohort size (default 2)")
    p.add_argument("--strict", action="store_const", const=True, default=None)
    p.add_argument("--decay", type=float)
    p.add_argument("--figures", action="store_const", const=True, default=None)

    p = sub.add_parser("significance", help="paired randomization test between two metrics")
    add_common(p)
    p.add_argument("--scores", action="append")
    p.add_argument("--judgments")
    p.add_argument("--metric-a", dest="metric_a")
    p.add_argument("--metric-b", dest="metric_b")
    p.add_argument("--tie-policy", dest="tie_policy")
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)

    return parser


COMMANDS = {
    "score": cmd_score,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "analyze": cmd_analyze,
    "significance": cmd_significance,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _read_config(args.config)
        return COMMANDS[args.command](args, config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DiscevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
