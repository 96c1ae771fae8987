#!/usr/bin/env python3
"""
Pair-counting throughput report

Times pre-token counting and the merge loop on a synthetic corpus for a few
vocabulary sizes and prints one line per size.
"""

import argparse
import os
import sys
import time

import numpy as np
from tqdm import tqdm

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from corpus_forge.tokenizer import count_pre_tokens, learn_merges

LETTERS = [chr(c) for c in range(0x5D0, 0x5EB)]


def synthetic_texts(documents: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    lexicon = ["".join(rng.choice(LETTERS, size=rng.integers(2, 9))) for _ in range(5000)]
    weights = 1.0 / np.arange(1, len(lexicon) + 1)
    weights /= weights.sum()
    return [" ".join(rng.choice(lexicon, size=rng.integers(20, 200), p=weights)) for _ in range(documents)]


def main() -> None:
    parser = argparse.ArgumentParser(description="Benchmark BPE pair counting.")
    parser.add_argument("--documents", type=int, default=5000)
    parser.add_argument("--vocab-sizes", default="1000,4000,8000")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    texts = synthetic_texts(args.documents, args.seed)
    corpus_bytes = sum(len(t.encode("utf-8")) for t in texts)

    started = time.perf_counter()
    counts = count_pre_tokens(tqdm(texts, desc="pre-tokens", unit="doc"))
    counted = time.perf_counter() - started
    print(f"pre-token counting: bytes={corpus_bytes} types={len(counts)} seconds={counted:.2f} "
          f"mb_per_s={corpus_bytes / 1e6 / max(counted, 1e-9):.2f}")

    for vocab_size in (int(v) for v in args.vocab_sizes.split(",")):
        started = time.perf_counter()
        merges, _ = learn_merges(counts, vocab_size, 2)
        elapsed = time.perf_counter() - started
        print(f"vocab_size={vocab_size} merges={len(merges)} seconds={elapsed:.2f} "
              f"merges_per_s={len(merges) / max(elapsed, 1e-9):.1f}")


if __name__ == "__main__":
    main()
