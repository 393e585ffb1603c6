#!/usr/bin/env python3
"""Writes the toy parallel corpora under data/toy (English source, synthetic targets)."""
import random
import sys
from pathlib import Path

DET = ["the", "a", "this", "every"]
ADJ = ["small", "old", "red", "quiet"]
NOUN = ["cat", "dog", "bird", "child", "teacher", "farmer", "house", "river", "apple", "book"]
VERB = ["sees", "likes", "finds", "takes", "reads", "carries"]
ADP = ["near", "under", "behind"]

# per-language letter substitutions; order decides where the verb goes
LANGS = {
    "toy_sov_a": ("SOV", str.maketrans("aeioutdk", "oaueisnt")),
    "toy_sov_b": ("SOV", str.maketrans("aeiourls", "eioaulrz")),
    "toy_flex": ("FLEXIBLE", str.maketrans("aeiocgpb", "iaoekgbp")),
    "toy_svo": ("SVO", str.maketrans("aeiou", "eaiuo")),
}


def noun_phrase(rng):
    words = [(rng.choice(DET), "DET")]
    if rng.random() < 0.4:
        words.append((rng.choice(ADJ), "ADJ"))
    words.append((rng.choice(NOUN), "NOUN"))
    return words


def sentence(rng):
    subj, obj = noun_phrase(rng), noun_phrase(rng)
    verb = [(rng.choice(VERB), "VERB")]
    tail = []
    if rng.random() < 0.3:
        tail = [(rng.choice(ADP), "ADP")] + noun_phrase(rng)
    return subj, verb, obj, tail


def main(out_dir, n=120, seed=11):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    sents = [sentence(rng) for _ in range(n)]
    dot = [(".", "PUNCT")]
    with open(out / "en.txt", "w") as src, open(out / "en.tags", "w") as tags:
        for subj, verb, obj, tail in sents:
            words = subj + verb + obj + tail + dot
            src.write(" ".join(w for w, _ in words) + "\n")
            tags.write("".join(f"{w}\t{t}\n" for w, t in words) + "\n")
    for code, (order, table) in LANGS.items():
        lrng = random.Random(f"{seed}:{code}")
        with open(out / f"{code}.txt", "w") as f:
            for subj, verb, obj, tail in sents:
                o = order if order != "FLEXIBLE" else lrng.choice(["SOV", "SVO", "OSV", "VSO"])
                parts = {"S": subj, "V": verb, "O": obj}
                words = [w for k in o for w in parts[k]] + tail + dot
                f.write(" ".join(w.translate(table) for w, _ in words) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "toy")
