#!/usr/bin/env python3
"""Regenerate the bundled synthetic corpus under data/synthetic/.

Two invented language pairs, ten segments each, four systems with a planted
quality order (sysA best, sysD worst), three judges whose rankings are noisy
observations of that order, and two external metric columns.  Everything is
seeded, so reruns reproduce the committed files byte for byte.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from disceval.trees import Edu, Span, TreeFile, save_tree_file, validate  # noqa: E402

SEED = 20250811
OUT = Path(__file__).resolve().parents[1] / "data" / "synthetic"

NOISE_WORDS = ["also", "still", "quite", "maybe", "later", "again", "often", "clearly"]
RELATIONS = [
    "Attribution", "Background", "Cause", "Condition", "Contrast",
    "Elaboration", "Enablement", "Evaluation", "Explanation", "Joint",
    "Same-Unit", "Temporal",
]

SYSTEM_PROFILES = {
    # word, relation, nuclearity, flatten probabilities; planted quality index
    "sysA": dict(word=0.04, rel=0.05, nuc=0.03, flat=0.02, quality=4),
    "sysB": dict(word=0.12, rel=0.15, nuc=0.10, flat=0.08, quality=3),
    "sysC": dict(word=0.28, rel=0.35, nuc=0.25, flat=0.20, quality=2),
    "sysD": dict(word=0.50, rel=0.60, nuc=0.45, flat=0.40, quality=1),
}
ABSENT = {"aa-en": {"sysD": [7]}, "bb-en": {"sysD": [4]}}
JUDGES = ["judge1", "judge2", "judge3"]


def E(nuc, text):
    return Edu(nuclearity=nuc, tokens=tuple(text.split()))


def S(nuc, rel, *children):
    return Span(nuclearity=nuc, relation=rel, children=tuple(children))


def base_trees(lang_pair: str) -> TreeFile:
    if lang_pair == "aa-en":
        return {
            1: S("Root", "Attribution",
                 E("Satellite", "the minister said"),
                 E("Nucleus", "the budget will pass next year")),
            2: S("Root", "Elaboration",
                 E("Nucleus", "the old bridge was closed"),
                 E("Satellite", "because repairs had finally begun")),
            3: E("Root", "markets fell sharply on monday"),
            4: S("Root", "Joint",
                 E("Nucleus", "the team won the match"),
                 E("Nucleus", "and the fans celebrated all night")),
            5: S("Root", "Contrast",
                 S("Nucleus", "Elaboration",
                   E("Nucleus", "exports grew this quarter"),
                   E("Satellite", "which surprised most analysts")),
                 E("Nucleus", "but imports kept falling")),
            6: S("Root", "Condition",
                 E("Satellite", "if the talks fail"),
                 E("Nucleus", "the strike will continue")),
            7: S("Root", "Attribution",
                 E("Satellite", "officials announced"),
                 S("Nucleus", "Temporal",
                   E("Nucleus", "the airport will reopen"),
                   E("Satellite", "after the storm passes"))),
            8: S("Root", "Elaboration",
                 E("Nucleus", "the new law protects small farms"),
                 S("Satellite", "Joint",
                   E("Nucleus", "it lowers taxes"),
                   E("Nucleus", "and it simplifies permits"))),
            9: E("Root", "nobody expected such a quiet vote"),
            10: S("Root", "Explanation",
                  S("Nucleus", "Same-Unit",
                    E("Nucleus", "the festival"),
                    E("Nucleus", "drew record crowds")),
                  E("Satellite", "since tickets were free this time")),
        }
    return {
        1: S("Root", "Cause",
             E("Nucleus", "the plant shut down"),
             E("Satellite", "after inspectors found a leak")),
        2: S("Root", "Attribution",
             E("Satellite", "the coach admitted"),
             E("Nucleus", "the squad lacked experience")),
        3: S("Root", "Elaboration",
             E("Nucleus", "the museum opened a new wing"),
             S("Satellite", "Elaboration",
               E("Nucleus", "which hosts modern art"),
               E("Satellite", "collected over two decades"))),
        4: E("Root", "rain delayed every flight"),
        5: S("Root", "Joint",
             E("Nucleus", "prices rose in the north"),
             E("Nucleus", "and wages stalled in the south")),
        6: S("Root", "Enablement",
             E("Nucleus", "the city rebuilt the harbor"),
             E("Satellite", "to attract larger ships")),
        7: S("Root", "Contrast",
             E("Nucleus", "critics praised the script"),
             S("Nucleus", "Evaluation",
               E("Nucleus", "yet the acting felt flat"),
               E("Satellite", "reviewers agreed"))),
        8: S("Root", "Background",
             E("Satellite", "founded a century ago"),
             E("Nucleus", "the firm now employs thousands")),
        9: S("Root", "Condition",
             E("Satellite", "unless funding arrives soon"),
             E("Nucleus", "the study will stop")),
        10: E("Root", "the committee approved the plan unanimously"),
    }


def perturb_tokens(tokens, p, rng):
    out = []
    for tok in tokens:
        roll = rng.random()
        if roll < p * 0.5:
            out.append(rng.choice(NOISE_WORDS))  # substitution
        elif roll < p * 0.8:
            continue  # deletion
        else:
            out.append(tok)
            if roll > 1 - p * 0.2:
                out.append(rng.choice(NOISE_WORDS))  # insertion
    if not out:
        out = [rng.choice(NOISE_WORDS)]
    return tuple(out)


def reassign_nuclearity(children, rng):
    if rng.random() < 0.5:
        nucs = ["Nucleus"] * len(children)  # make multinuclear
    else:
        nucs = ["Satellite"] * len(children)
        nucs[rng.randrange(len(children))] = "Nucleus"
    return [
        Edu(n, c.tokens) if isinstance(c, Edu) else Span(n, c.relation, c.children)
        for n, c in zip(nucs, children)
    ]


def collapse(node, nuc):
    tokens = []
    stack = [node]
    while stack:
        cur = stack.pop(0)
        if isinstance(cur, Edu):
            tokens.extend(cur.tokens)
        else:
            stack = list(cur.children) + stack
    return Edu(nuc, tuple(tokens))


def perturb(node, profile, rng, is_root=True):
    nuc = node.nuclearity
    if isinstance(node, Edu):
        return Edu(nuc, perturb_tokens(node.tokens, profile["word"], rng))
    if not is_root and rng.random() < profile["flat"]:
        return collapse(node, nuc)
    rel = rng.choice(RELATIONS) if rng.random() < profile["rel"] else node.relation
    children = list(node.children)
    if rng.random() < profile["nuc"]:
        children = reassign_nuclearity(children, rng)
    children = [perturb(c, profile, rng, is_root=False) for c in children]
    return Span(nuc, rel, tuple(children))


def make_system_trees(lang_pair, system, refs, rng):
    profile = SYSTEM_PROFILES[system]
    absent = set(ABSENT.get(lang_pair, {}).get(system, []))
    out = {}
    for seg, ref in refs.items():
        out[seg] = None if seg in absent else perturb(ref, profile, rng)
    return out


def make_judgments(lang_pair, rng):
    lines = []
    for seg in range(1, 11):
        for judge in JUDGES:
            noisy = {
                system: SYSTEM_PROFILES[system]["quality"] + rng.gauss(0.0, 0.8)
                for system in SYSTEM_PROFILES
            }
            ordered = sorted(noisy, key=lambda s: (-noisy[s], s))
            ranks = {}
            rank = 0
            previous = None
            for system in ordered:
                if previous is None or previous - noisy[system] >= 0.25:
                    rank = len(ranks) + 1
                ranks[system] = rank
                previous = noisy[system]
            ranking = ",".join(f"{s}:{ranks[s]}" for s in sorted(ranks))
            lines.append(f"{lang_pair}\t{seg}\t{judge}\t{ranking}")
    return lines


def make_external_scores(lang_pairs, rng):
    rows = []
    for lang_pair in lang_pairs:
        for system, profile in sorted(SYSTEM_PROFILES.items()):
            for seg in range(1, 11):
                ext_a = 0.5 + 0.12 * profile["quality"] + rng.gauss(0.0, 0.08)
                ext_b = 20.0 + rng.gauss(0.0, 5.0)
                rows.append(("extA", lang_pair, system, seg, ext_a))
                rows.append(("extB", lang_pair, system, seg, ext_b))
    rows.sort()
    lines = ["metric\tlang_pair\tsystem\tsegment\tscore"]
    lines += [f"{m}\t{lp}\t{s}\t{seg}\t{v:.12g}" for m, lp, s, seg, v in rows]
    return lines


def main():
    rng = random.Random(SEED)
    lang_pairs = ["aa-en", "bb-en"]
    judgment_lines = []
    for lang_pair in lang_pairs:
        refs = base_trees(lang_pair)
        for tree in refs.values():
            validate(tree, strict=True)
        pair_dir = OUT / lang_pair
        pair_dir.mkdir(parents=True, exist_ok=True)
        save_tree_file(refs, pair_dir / "refs.jsonl")
        for system in sorted(SYSTEM_PROFILES):
            trees = make_system_trees(lang_pair, system, refs, rng)
            save_tree_file(trees, pair_dir / f"{system}.jsonl")
        judgment_lines += make_judgments(lang_pair, rng)

    with open(OUT / "judgments.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(judgment_lines) + "\n")
    with open(OUT / "external_scores.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(make_external_scores(lang_pairs, rng)) + "\n")
    print(f"wrote corpus under {OUT}")


if __name__ == "__main__":
    main()
