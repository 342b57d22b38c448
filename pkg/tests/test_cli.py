import json
from pathlib import Path

from disceval.cli import main

from conftest import DATA_DIR, GOLDEN_DIR


def run_pipeline(out_dir: Path, seed: int = 42) -> dict[str, Path]:
    """The full score -> tune -> evaluate -> analyze -> significance chain on
    the bundled corpus; returns the produced files."""
    out_dir.mkdir(parents=True, exist_ok=True)
    data = DATA_DIR
    outputs = {}
    score_args = []
    for lp in ("aa", "bb"):
        out = out_dir / f"dr_{lp}.tsv"
        argv = [
            "score",
            "--refs", str(data / f"{lp}-en" / "refs.jsonl"),
            "--lang-pair", f"{lp}-en",
            "--out", str(out),
        ]
        for system in ("sysA", "sysB", "sysC", "sysD"):
            argv += ["--hyps", f"{system}={data / f'{lp}-en' / f'{system}.jsonl'}"]
        assert main(argv) == 0
        outputs[f"dr_{lp}.tsv"] = out
        score_args += ["--scores", str(out)]
    score_args += ["--scores", str(data / "external_scores.tsv")]
    judgments = ["--judgments", str(data / "judgments.tsv")]

    model = out_dir / "model.json"
    assert main(["tune", *score_args, *judgments, "--seed", str(seed), "--out", str(model)]) == 0
    outputs["model.json"] = model

    evaluation = out_dir / "eval.json"
    assert (
        main(
            [
                "evaluate", *score_args, *judgments,
                "--model", str(model),
                "--tie-policy", "both",
                "--out", str(evaluation),
            ]
        )
        == 0
    )
    outputs["eval.json"] = evaluation
    outputs["eval.txt"] = evaluation.with_suffix(".txt")

    analysis_out = out_dir / "analysis.json"
    argv = [
        "analyze",
        "--refs", str(data / "aa-en" / "refs.jsonl"),
        *judgments,
        "--lang-pair", "aa-en",
        "--out", str(analysis_out),
    ]
    for system in ("sysA", "sysB", "sysC", "sysD"):
        argv += ["--hyps", f"{system}={data / 'aa-en' / f'{system}.jsonl'}"]
    assert main(argv) == 0
    outputs["analysis.json"] = analysis_out
    outputs["analysis.txt"] = analysis_out.with_suffix(".txt")
    outputs["analysis_ablation_scores.tsv"] = out_dir / "analysis_ablation_scores.tsv"

    sig = out_dir / "sig.json"
    assert (
        main(
            [
                "significance", *score_args, *judgments,
                "--metric-a", "DR-LEX",
                "--metric-b", "extB",
                "--seed", "7",
                "--out", str(sig),
            ]
        )
        == 0
    )
    outputs["sig.json"] = sig
    outputs["sig.txt"] = sig.with_suffix(".txt")
    return outputs


class TestPipeline:
    def test_matches_golden_outputs(self, tmp_path):
        outputs = run_pipeline(tmp_path)
        for name, path in outputs.items():
            golden = GOLDEN_DIR / name
            assert path.read_bytes() == golden.read_bytes(), f"{name} drifted"

    def test_tune_model_contents(self, tmp_path):
        outputs = run_pipeline(tmp_path)
        model = json.loads(outputs["model.json"].read_text())
        weights = dict(zip(model["metrics"], model["weights"]))
        # the planted informative external metric should carry real weight
        assert weights["extA"] > abs(weights["extB"])
        assert model["metadata"]["seed"] == 42

    def test_eval_report_shape(self, tmp_path):
        outputs = run_pipeline(tmp_path)
        report = json.loads(outputs["eval.json"].read_text())
        assert "COMBINED" in report["metrics"]
        combined = report["metrics"]["COMBINED"]
        assert set(combined["segment_level"]) == {"exclude", "discordant"}
        assert combined["segment_level"]["exclude"]["overall"] > 0.5
        assert set(combined["system_level"]) == {"spearman", "pearson"}


class TestScoreCommand:
    def test_missing_hyp_file(self, tmp_path):
        code = main(
            [
                "score",
                "--refs", str(DATA_DIR / "aa-en" / "refs.jsonl"),
                "--hyps", f"sysA={tmp_path / 'missing.jsonl'}",
                "--out", str(tmp_path / "out.tsv"),
            ]
        )
        assert code == 2

    def test_bad_hyps_syntax(self, tmp_path):
        code = main(
            [
                "score",
                "--refs", str(DATA_DIR / "aa-en" / "refs.jsonl"),
                "--hyps", "no-equals-sign",
                "--out", str(tmp_path / "out.tsv"),
            ]
        )
        assert code == 2

    def test_unknown_representation(self, tmp_path):
        code = main(
            [
                "score",
                "--refs", str(DATA_DIR / "aa-en" / "refs.jsonl"),
                "--hyps", f"sysA={DATA_DIR / 'aa-en' / 'sysA.jsonl'}",
                "--rep", "DR-MAGIC",
                "--out", str(tmp_path / "out.tsv"),
            ]
        )
        assert code == 2

    def test_single_rep_subset(self, tmp_path):
        out = tmp_path / "out.tsv"
        code = main(
            [
                "score",
                "--refs", str(DATA_DIR / "aa-en" / "refs.jsonl"),
                "--hyps", f"sysA={DATA_DIR / 'aa-en' / 'sysA.jsonl'}",
                "--rep", "DR-LEX",
                "--ablation", "norel",
                "--out", str(out),
            ]
        )
        assert code == 0
        header, first = out.read_text().splitlines()[:2]
        assert first.startswith("DR-LEX@norel\t")


class TestUsageErrors:
    def test_tune_requires_seed(self, tmp_path):
        code = main(
            [
                "tune",
                "--scores", str(DATA_DIR / "external_scores.tsv"),
                "--judgments", str(DATA_DIR / "judgments.tsv"),
                "--out", str(tmp_path / "model.json"),
            ]
        )
        assert code == 2

    def test_evaluate_model_and_uniform_conflict(self, tmp_path):
        code = main(
            [
                "evaluate",
                "--scores", str(DATA_DIR / "external_scores.tsv"),
                "--judgments", str(DATA_DIR / "judgments.tsv"),
                "--model", "whatever.json",
                "--uniform", "extA,extB",
                "--out", str(tmp_path / "eval.json"),
            ]
        )
        assert code == 2

    def test_empty_judgments(self, tmp_path):
        empty = tmp_path / "empty.tsv"
        empty.write_text("")
        code = main(
            [
                "tune",
                "--scores", str(DATA_DIR / "external_scores.tsv"),
                "--judgments", str(empty),
                "--seed", "1",
                "--out", str(tmp_path / "model.json"),
            ]
        )
        assert code == 2

    def test_computation_error_exit_code(self, tmp_path):
        # constant metric column: every judged pair is a metric tie
        scores = tmp_path / "flat.tsv"
        lines = ["metric\tlang_pair\tsystem\tsegment\tscore"]
        for lp in ("aa-en", "bb-en"):
            for system in ("sysA", "sysB", "sysC", "sysD"):
                for seg in range(1, 11):
                    lines.append(f"flat\t{lp}\t{system}\t{seg}\t0.5")
        scores.write_text("\n".join(lines) + "\n")
        code = main(
            [
                "evaluate",
                "--scores", str(scores),
                "--judgments", str(DATA_DIR / "judgments.tsv"),
                "--level", "segment",
                "--out", str(tmp_path / "eval.json"),
            ]
        )
        assert code == 1


class TestConfigFile:
    def test_flags_win_over_config(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(
            "scores={}\njudgments={}\ntie-policy=both\nlevel=segment\nout={}\n".format(
                DATA_DIR / "external_scores.tsv",
                DATA_DIR / "judgments.tsv",
                tmp_path / "from_config.json",
            )
        )
        out = tmp_path / "from_flag.json"
        code = main(
            [
                "evaluate",
                "--config", str(config),
                "--tie-policy", "exclude",
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["config"]["tie_policies"] == ["exclude"]
        assert not (tmp_path / "from_config.json").exists()

    def test_config_supplies_missing_options(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(
            "# pipeline defaults\nscores={}\njudgments={}\nseed=5\n".format(
                DATA_DIR / "external_scores.tsv", DATA_DIR / "judgments.tsv"
            )
        )
        out = tmp_path / "model.json"
        code = main(["tune", "--config", str(config), "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["metadata"]["seed"] == 5


class TestFigures:
    def test_analyze_writes_figures(self, tmp_path):
        out = tmp_path / "analysis.json"
        argv = [
            "analyze",
            "--refs", str(DATA_DIR / "aa-en" / "refs.jsonl"),
            "--judgments", str(DATA_DIR / "judgments.tsv"),
            "--lang-pair", "aa-en",
            "--figures",
            "--out", str(out),
        ]
        for system in ("sysA", "sysB", "sysC", "sysD"):
            argv += ["--hyps", f"{system}={DATA_DIR / 'aa-en' / f'{system}.jsonl'}"]
        assert main(argv) == 0
        for suffix in ("_ablation", "_depth", "_relations", "_cohort_f1"):
            png = tmp_path / f"analysis{suffix}.png"
            assert png.exists() and png.stat().st_size > 0

    def test_evaluate_writes_figures(self, tmp_path):
        out = tmp_path / "eval.json"
        code = main(
            [
                "evaluate",
                "--scores", str(DATA_DIR / "external_scores.tsv"),
                "--judgments", str(DATA_DIR / "judgments.tsv"),
                "--figures",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert (tmp_path / "eval_segment.png").stat().st_size > 0
        assert (tmp_path / "eval_system.png").stat().st_size > 0


class TestEpsilonTieBreaking:
    def test_epsilon_resolves_metric_ties(self, tmp_path):
        # DR produces many tied (often zero) segment scores on the corpus;
        # the perturbation must remove every metric tie from the tau counts.
        run = run_pipeline(tmp_path / "base")
        common = [
            "evaluate",
            "--scores", str(run["dr_aa.tsv"]),
            "--scores", str(run["dr_bb.tsv"]),
            "--judgments", str(DATA_DIR / "judgments.tsv"),
            "--metric", "DR",
            "--level", "segment",
        ]
        plain, broken = tmp_path / "plain.json", tmp_path / "broken.json"
        assert main(common + ["--out", str(plain)]) == 0
        assert main(common + ["--epsilon", "1e-6", "--out", str(broken)]) == 0
        before = json.loads(plain.read_text())["metrics"]["DR"]["segment_level"]["exclude"]
        after = json.loads(broken.read_text())["metrics"]["DR"]["segment_level"]["exclude"]
        assert before["counts"]["excluded"] > 0
        assert after["counts"]["excluded"] == 0
        assert after["overall"] >= before["overall"] - 1e-9


class TestUniformCombination:
    def test_uniform_adds_combined_metric(self, tmp_path):
        out = tmp_path / "eval.json"
        code = main(
            [
                "evaluate",
                "--scores", str(DATA_DIR / "external_scores.tsv"),
                "--judgments", str(DATA_DIR / "judgments.tsv"),
                "--uniform", "extA,extB",
                "--level", "segment",
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert "COMBINED" in report["metrics"]

    def test_uniform_with_unknown_metric(self, tmp_path):
        code = main(
            [
                "evaluate",
                "--scores", str(DATA_DIR / "external_scores.tsv"),
                "--judgments", str(DATA_DIR / "judgments.tsv"),
                "--uniform", "extA,ghost",
                "--out", str(tmp_path / "eval.json"),
            ]
        )
        assert code == 2


class TestDecayFlag:
    def test_decay_changes_scores(self, tmp_path):
        base_args = [
            "score",
            "--refs", str(DATA_DIR / "aa-en" / "refs.jsonl"),
            "--hyps", f"sysB={DATA_DIR / 'aa-en' / 'sysB.jsonl'}",
            "--rep", "DR-LEX",
            "--lang-pair", "aa-en",
        ]
        full, damped = tmp_path / "full.tsv", tmp_path / "damped.tsv"
        assert main(base_args + ["--out", str(full)]) == 0
        assert main(base_args + ["--decay", "0.5", "--out", str(damped)]) == 0
        assert full.read_bytes() != damped.read_bytes()


class TestSignificanceCommand:
    def test_same_seed_same_pvalue(self, tmp_path):
        args = [
            "significance",
            "--scores", str(DATA_DIR / "external_scores.tsv"),
            "--judgments", str(DATA_DIR / "judgments.tsv"),
            "--metric-a", "extA",
            "--metric-b", "extB",
            "--rounds", "2000",
            "--seed", "3",
        ]
        out1, out2 = tmp_path / "s1.json", tmp_path / "s2.json"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert json.loads(out1.read_text())["p_value"] <= 1.0
