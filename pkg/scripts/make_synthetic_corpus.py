#!/usr/bin/env python3
"""Generate the desk-scale synthetic dataset: corpus, embeddings, aspect model.

Writes corpus.jsonl, emb.bin, and model.json into the output directory so the
CLI commands (simulate / serve / compare-profiles) can be pointed at them.
"""

import argparse
from pathlib import Path

from prefer.aspects import discover_aspects, normalize_rows, save_embeddings, save_model
from prefer.corpus import save_tables
from prefer.synth import SyntheticSpec, make_synthetic_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("data"))
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--products", type=int, default=3)
    ap.add_argument("--sentences", type=int, default=200, help="sentences per product")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--variance-target", type=float, default=0.9)
    ap.add_argument("--r", type=float, default=10.0, help="temperature calibration ratio")
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    spec = SyntheticSpec(
        k=args.k, products=args.products, sentences_per_product=args.sentences, seed=args.seed
    )
    tables, emb = make_synthetic_corpus(spec)
    save_tables(tables, args.out / "corpus.jsonl")
    save_embeddings(emb, args.out / "emb.bin")
    model, _ = discover_aspects(
        normalize_rows(emb), k=args.k, variance_target=args.variance_target, seed=7, r=args.r
    )
    save_model(model, args.out / "model.json")
    print(f"wrote corpus.jsonl ({len(tables.sentences)} sentences), emb.bin, model.json to {args.out}")
    print(f"aspect model: K={model.k}, m={model.m}, tau={model.tau:.4f}")


if __name__ == "__main__":
    main()
