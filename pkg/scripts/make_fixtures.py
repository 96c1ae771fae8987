#!/usr/bin/env python3
"""
Generate synthetic fixtures for local runs

Writes, under --output:
- corpus.jsonl           Hebrew-like documents for `forge corpus ingest`
- smcd/train.tsv, test.tsv
- bmc/train.conll, test.conll   (and the same for nemo)

Everything is derived from --seed, so two runs produce identical files.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from corpus_forge.benchmarks import LABELS, TaggedSentence, save_conll

LETTERS = [chr(c) for c in range(0x5D0, 0x5EB)]
SENTIMENT_WORDS = {"positive": "מצוין", "neutral": "רגיל", "negative": "גרוע"}
ENTITY_TYPES = ("PER", "ORG", "LOC")


def make_lexicon(rng: np.random.Generator, size: int = 400) -> list:
    return ["".join(rng.choice(LETTERS, size=rng.integers(2, 8))) for _ in range(size)]


def sentence(rng: np.random.Generator, lexicon: list, low: int = 4, high: int = 16) -> list:
    weights = 1.0 / np.arange(1, len(lexicon) + 1)
    weights /= weights.sum()
    return list(rng.choice(lexicon, size=rng.integers(low, high), p=weights))


def write_corpus(path: Path, rng, lexicon, documents: int) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for index in range(documents):
            text = " ".join(sentence(rng, lexicon, 20, 120)) + "."
            handle.write(json.dumps({"id": index, "text": text}, ensure_ascii=False) + "\n")


def write_sentiment(directory: Path, rng, lexicon, count: int) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for index in range(count):
        label = LABELS[index % len(LABELS)]
        words = sentence(rng, lexicon)
        words.insert(int(rng.integers(0, len(words))), SENTIMENT_WORDS[label])
        rows.append(f"{' '.join(words)} {index}\t{label}")
    cut = int(count * 0.8)
    (directory / "train.tsv").write_text("\n".join(rows[:cut]) + "\n", encoding="utf-8")
    (directory / "test.tsv").write_text("\n".join(rows[cut:]) + "\n", encoding="utf-8")


def tagged(rng, lexicon) -> TaggedSentence:
    tokens = sentence(rng, lexicon)
    tags = ["O"] * len(tokens)
    position = int(rng.integers(0, len(tokens)))
    width = int(min(rng.integers(1, 3), len(tokens) - position))
    kind = ENTITY_TYPES[int(rng.integers(0, len(ENTITY_TYPES)))]
    for offset in range(width):
        tags[position + offset] = ("B-" if offset == 0 else "I-") + kind
        tokens[position + offset] = kind.lower() + tokens[position + offset]
    return TaggedSentence(tuple(tokens), tuple(tags))


def write_conll(directory: Path, rng, lexicon, count: int) -> None:
    sentences = [tagged(rng, lexicon) for _ in range(count)]
    cut = int(count * 0.8)
    save_conll(sentences[:cut], directory / "train.conll")
    save_conll(sentences[cut:], directory / "test.conll")


def main() -> None:
    parser = argparse.ArgumentParser(description="Generate synthetic corpus and benchmark fixtures.")
    parser.add_argument("--output", default="fixtures")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--documents", type=int, default=2000)
    parser.add_argument("--samples", type=int, default=600)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    lexicon = make_lexicon(rng)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_corpus(out / "corpus.jsonl", rng, lexicon, args.documents)
    write_sentiment(out / "smcd", rng, lexicon, args.samples)
    write_conll(out / "bmc", rng, lexicon, args.samples)
    write_conll(out / "nemo", rng, lexicon, args.samples)
    print(f"Fixtures written to {out}")


if __name__ == "__main__":
    main()
