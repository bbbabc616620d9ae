"""The per-user interaction loop shared by the simulator and the service.

One engine owns one preference state and walks the round-robin product
rotation: select evidence with the current estimate, compose the summary,
then fold scalar feedback back into the estimate.  Keeping this in one place
guarantees a scripted client driving the HTTP API reproduces simulator
trajectories bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aspects import AspectModel, EmbeddingMatrix, normalize_rows, soft_assign
from .corpus import CorpusTables
from .preference import (
    AspectProfileConfig,
    FeedbackOutcome,
    PreferenceState,
    apply_feedback,
    aspect_profile,
)
from .selection import EvidenceCandidate, SelectionConfig, SelectedEvidence, select
from .summarize import StubRewriter, SummaryArtifact, summarize


@dataclass
class ProductCatalog:
    """Per-product candidate lists plus the sentence lookup tables."""

    candidates: dict[str, list[EvidenceCandidate]]
    phi_by_id: dict[int, np.ndarray]
    text_by_id: dict[int, str]
    reviewer_by_id: dict[int, str]
    k: int

    def require(self, product_id: str) -> list[EvidenceCandidate]:
        if product_id not in self.candidates:
            raise KeyError(f"unknown product id {product_id!r}")
        return self.candidates[product_id]

    @property
    def product_ids(self) -> list[str]:
        return sorted(self.candidates)


def build_catalog(
    tables: CorpusTables,
    emb: EmbeddingMatrix,
    model: AspectModel,
) -> ProductCatalog:
    """Embed every sentence into aspect space and group by product."""
    if len(tables.sentences) != emb.rows:
        raise ValueError("one embedding row per sentence required")
    if not emb.normalized:
        emb = normalize_rows(emb)
    reduced = model.pca.project(emb.data)
    phi = soft_assign(model, emb.data)
    candidates: dict[str, list[EvidenceCandidate]] = {}
    phi_by_id: dict[int, np.ndarray] = {}
    text_by_id: dict[int, str] = {}
    reviewer_by_id: dict[int, str] = {}
    for row, sent in enumerate(tables.sentences):
        sid = sent.sentence_id
        cand = EvidenceCandidate(
            sentence_id=sid,
            phi=phi[row],
            reduced_vec=reduced[row],
            token_count=sent.token_count,
        )
        candidates.setdefault(sent.product_id, []).append(cand)
        phi_by_id[sid] = phi[row]
        text_by_id[sid] = sent.text
        reviewer_by_id[sid] = sent.user_id
    for lst in candidates.values():
        lst.sort(key=lambda c: c.sentence_id)
    return ProductCatalog(
        candidates=candidates,
        phi_by_id=phi_by_id,
        text_by_id=text_by_id,
        reviewer_by_id=reviewer_by_id,
        k=model.k,
    )


@dataclass
class RoundArtifacts:
    round: int
    product_id: str
    selected: SelectedEvidence
    z: np.ndarray
    summary: SummaryArtifact


class SessionEngine:
    """Drives one user's rounds; selection and update logic lives elsewhere."""

    def __init__(
        self,
        catalog: ProductCatalog,
        products: list[str],
        sel_cfg: SelectionConfig,
        pref_state: PreferenceState,
        profile_cfg: AspectProfileConfig | None = None,
        rewriter=None,
        online: bool = True,
    ):
        if not products:
            raise ValueError("product rotation must be non-empty")
        for pid in products:
            catalog.require(pid)
        self.catalog = catalog
        self.products = list(products)
        self.sel_cfg = sel_cfg
        self.state = pref_state
        self.profile_cfg = profile_cfg or AspectProfileConfig()
        self.rewriter = rewriter or StubRewriter()
        self.online = online
        self.round = 1

    def product_for_round(self, t: int) -> str:
        return self.products[(t - 1) % len(self.products)]

    def run_selection(self) -> RoundArtifacts:
        """Select evidence and compose the round's summary (no state change)."""
        t = self.round
        product_id = self.product_for_round(t)
        cands = self.catalog.require(product_id)
        selected = select(cands, self.state.w_hat, self.sel_cfg, round_t=t)
        z = aspect_profile(selected, self.catalog.phi_by_id, self.profile_cfg)
        summary = summarize(
            selected,
            self.catalog.phi_by_id,
            self.catalog.reviewer_by_id,
            self.catalog.text_by_id,
            self.state.w_hat,
            z,
            rewriter=self.rewriter,
        )
        return RoundArtifacts(round=t, product_id=product_id, selected=selected, z=z, summary=summary)

    def apply_round_feedback(self, f: float, z: np.ndarray) -> FeedbackOutcome:
        """Center feedback, update the estimate when online, advance the round."""
        outcome = apply_feedback(self.state, f, z, update=self.online)
        self.state = outcome.state
        self.round += 1
        return outcome
