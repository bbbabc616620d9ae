"""Desk-scale synthetic review corpora with planted aspect structure.

Sentences mix a dominant theme with a random minority blend, so aspect
vectors are peaked but not one-hot and relevance has real gradients to
follow.  Each product covers only a subset of themes with skewed
frequencies, the way real products emphasize different attributes; with a
selection budget above the per-product theme count this makes the marginal
picks (and hence the evidence profile) respond continuously to the
preference estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aspects import EmbeddingMatrix
from .corpus import CorpusTables, ReviewRecord, ingest, sentence_split

THEMES = [
    "color", "texture", "battery", "price", "shipping",
    "scent", "size", "durability", "comfort", "packaging",
]

_DETAILS = [
    "held up well after weeks of regular use",
    "was a pleasant surprise compared to the photos",
    "did not match what the listing promised at all",
    "made the whole purchase feel worth the money",
    "worked fine for daily routines around the house",
    "felt cheaper than expected out of the box",
    "impressed everyone in the family right away",
    "needed some getting used to at first",
]


@dataclass
class SyntheticSpec:
    k: int = 10
    products: int = 3
    sentences_per_product: int = 200
    reviewers_per_product: int = 40
    dim: int = 32
    noise: float = 0.05
    purity_low: float = 0.55
    purity_high: float = 0.99
    seed: int = 0


def _theme_ranks(spec: SyntheticSpec, p: int) -> np.ndarray:
    """Product-specific theme ranking; every theme leads on some product."""
    return (np.arange(spec.k) + 3 * p) % spec.k


def _theme_counts(spec: SyntheticSpec, ranks: np.ndarray) -> np.ndarray:
    """Every theme occurs in every product, with a product-specific skew."""
    weights = 1.0 / (1.0 + ranks)
    weights /= weights.sum()
    counts = np.maximum(1, np.floor(weights * spec.sentences_per_product).astype(int))
    counts[int(np.argmax(weights))] += spec.sentences_per_product - counts.sum()
    return counts


def make_synthetic_corpus(spec: SyntheticSpec) -> tuple[CorpusTables, EmbeddingMatrix]:
    """Build corpus tables plus an embedding matrix aligned row-for-row.

    Reviews are single-sentence with unique dedup keys, so the sentence
    table produced by the standard split has sentence_id == embedding row.
    """
    if spec.dim < spec.k:
        raise ValueError("embedding dim must be at least the number of themes")
    rng = np.random.default_rng(spec.seed)
    centers = np.zeros((spec.k, spec.dim))
    centers[:, : spec.k] = np.eye(spec.k)

    records: list[ReviewRecord] = []
    vectors: list[np.ndarray] = []
    ts = 0
    for p in range(spec.products):
        product_id = f"p{p}"
        ranks = _theme_ranks(spec, p)
        counts = _theme_counts(spec, ranks)
        # a theme's sentences are purest on the products where it leads,
        # diluted elsewhere: evidence quality per theme varies by product
        purity_hi = spec.purity_high - (spec.purity_high - spec.purity_low) * ranks / max(spec.k - 1, 1)
        for theme, count in enumerate(counts):
            for i in range(count):
                purity = rng.uniform(spec.purity_low, purity_hi[theme])
                # minority mass favors neighboring themes: related product
                # attributes co-occur in sentences, bridging adjacent aspects
                u = rng.random()
                if u < 0.4:
                    other = (theme + 1) % spec.k
                elif u < 0.8:
                    other = (theme - 1) % spec.k
                else:
                    other = int(rng.integers(spec.k - 1))
                    other += other >= theme
                mix = purity * np.eye(spec.k)[theme] + (1.0 - purity) * np.eye(spec.k)[other]
                vec = mix @ centers + spec.noise * rng.standard_normal(spec.dim)
                vectors.append(vec)
                reviewer = f"u{p}_{ts % spec.reviewers_per_product}"
                detail = _DETAILS[int(rng.integers(len(_DETAILS)))]
                text = f"The {THEMES[theme % len(THEMES)]} {detail}"
                records.append(
                    ReviewRecord(
                        user_id=reviewer,
                        product_id=product_id,
                        timestamp=ts,
                        title=f"about the {THEMES[theme % len(THEMES)]}",
                        text=text,
                        helpful_votes=int(rng.integers(0, 20)),
                        verified=bool(rng.integers(0, 2)),
                    )
                )
                ts += 1
    tables = sentence_split(ingest(records).tables, min_words=1, max_sentences_per_review=1)
    emb = EmbeddingMatrix(np.stack(vectors), normalized=False)
    if len(tables.sentences) != emb.rows:
        raise RuntimeError("synthetic corpus and embeddings fell out of alignment")
    return tables, emb
