"""Hierarchical summary composition over selected evidence.

Selected sentences are grouped by the reviewer-level support of their
dominant aspect (high/mid/low quantile bins), each bin is compressed, the
bin blocks are stitched into a draft, and a final polish pass produces the
user-facing text.  Rewriting is pluggable: a deterministic template stub
(used throughout the test suite, no network) or an external text-generation
endpoint with retry and stub fallback.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from importlib import resources

import httpx
import numpy as np

from .corpus import split_sentences
from .selection import SelectedEvidence

BIN_ORDER = ("high", "mid", "low")
STUB_TOKEN_CAP = 80
BACKOFF_BASE_SECONDS = 0.5


def _load_prompt(name: str) -> str:
    return resources.files("prefer.prompts").joinpath(name).read_text(encoding="utf-8")


STAGE1_TEMPLATE = _load_prompt("stage1_compress.txt")
# note: the stitch template's rule list intentionally jumps from 4 to 6;
# kept as-is for prompt-version stability.
STAGE2_TEMPLATE = _load_prompt("stage2_stitch.txt")
STAGE3_TEMPLATE = _load_prompt("stage3_polish.txt")


@dataclass
class SupportBins:
    support: dict[int, int]          # aspect -> distinct-reviewer count
    q33: float
    q67: float
    high: list[int]                  # sentence ids, selection order
    mid: list[int]
    low: list[int]
    bin_of_aspect: dict[int, str]

    def sentences(self, name: str) -> list[int]:
        return {"high": self.high, "mid": self.mid, "low": self.low}[name]


@dataclass
class SummaryArtifact:
    bin_summaries: dict[str, str]
    draft: str
    final: str
    provenance: dict[str, list[int]]  # bin -> sentence ids
    g_cos: float
    degraded: bool = False


def dominant_aspect(phi: np.ndarray) -> int:
    """Index of the largest aspect weight; ties go to the lowest index."""
    return int(np.argmax(np.asarray(phi)))


def bin_by_support(
    selected: SelectedEvidence,
    phi_by_id: dict[int, np.ndarray],
    reviewer_by_id: dict[int, str],
) -> SupportBins:
    """Group selected sentences by their dominant aspect's reviewer support.

    Support n_k counts distinct reviewers, so repeated sentences from one
    reviewer do not inflate an aspect.  Quantiles are linear interpolations
    over the multiset of supports; an aspect is high if n_k >= q67 (checked
    first), low if n_k <= q33, mid otherwise.
    """
    if not selected.picks:
        raise ValueError("empty selection")
    aspect_of: dict[int, int] = {}
    reviewers: dict[int, set[str]] = {}
    for sid in selected.sentence_ids:
        a = dominant_aspect(phi_by_id[sid])
        aspect_of[sid] = a
        reviewers.setdefault(a, set()).add(reviewer_by_id[sid])
    support = {a: len(users) for a, users in reviewers.items()}
    values = np.array(sorted(support.values()), dtype=np.float64)
    q33 = float(np.quantile(values, 0.33))
    q67 = float(np.quantile(values, 0.67))
    bin_of_aspect = {}
    for a, n in support.items():
        if n >= q67:
            bin_of_aspect[a] = "high"
        elif n <= q33:
            bin_of_aspect[a] = "low"
        else:
            bin_of_aspect[a] = "mid"
    bins: dict[str, list[int]] = {"high": [], "mid": [], "low": []}
    for sid in selected.sentence_ids:
        bins[bin_of_aspect[aspect_of[sid]]].append(sid)
    return SupportBins(
        support=support,
        q33=q33,
        q67=q67,
        high=bins["high"],
        mid=bins["mid"],
        low=bins["low"],
        bin_of_aspect=bin_of_aspect,
    )


# ---------------------------------------------------------------------------
# rewriters
# ---------------------------------------------------------------------------


class RewriterError(RuntimeError):
    pass


class StubRewriter:
    """Deterministic template rewriter; the whole pipeline runs offline."""

    def compress(self, evidence_texts: list[str]) -> str:
        seen: set[str] = set()
        firsts: list[str] = []
        for text in evidence_texts:
            key = " ".join(text.split()).casefold()
            if key in seen:
                continue
            seen.add(key)
            parts = split_sentences(text)
            if parts:
                firsts.append(parts[0])
        joined = " ".join(firsts)
        tokens = joined.split()
        return " ".join(tokens[:STUB_TOKEN_CAP])

    def stitch(self, bin_summaries: dict[str, str], stats: dict[str, dict]) -> str:
        lines = []
        for name in BIN_ORDER:
            if name in bin_summaries:
                lines.append(f"{name.upper()}: {bin_summaries[name]}")
        return "\n".join(lines)

    def polish(self, draft: str) -> str:
        return " ".join(draft.splitlines())


@dataclass
class RewriterEndpoint:
    base_url: str
    model: str
    timeout: float = 30.0
    max_retries: int = 3
    api_key_env: str = "PREFER_API_KEY"

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


class HttpRewriter:
    """Prompted rewriter backed by a JSON text-generation endpoint.

    Sends POST {base_url}/generate with {"model", "prompt", "max_tokens"} and
    expects {"text": ...}.  Empty responses count as failures.  Retries with
    exponential backoff (base 0.5 s); exhausted retries raise RewriterError.
    """

    def __init__(
        self,
        endpoint: RewriterEndpoint,
        max_tokens: int = 256,
        transport: httpx.BaseTransport | None = None,
        sleep=time.sleep,
    ):
        self.endpoint = endpoint
        self.max_tokens = max_tokens
        self._client = httpx.Client(transport=transport, timeout=endpoint.timeout)
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        key = os.environ.get(self.endpoint.api_key_env, "")
        return {"Authorization": f"Bearer {key}"} if key else {}

    def generate(self, prompt: str) -> str:
        url = self.endpoint.base_url.rstrip("/") + "/generate"
        payload = {
            "model": self.endpoint.model,
            "prompt": prompt,
            "max_tokens": self.max_tokens,
        }
        last_error: Exception | None = None
        for attempt in range(self.endpoint.max_retries):
            if attempt > 0:
                self._sleep(BACKOFF_BASE_SECONDS * 2 ** (attempt - 1))
            try:
                resp = self._client.post(url, json=payload, headers=self._headers())
                resp.raise_for_status()
                text = str(resp.json().get("text", "")).strip()
                if text:
                    return text
                last_error = RewriterError("endpoint returned empty text")
            except (httpx.HTTPError, ValueError) as e:
                last_error = e
        raise RewriterError(f"generation failed after {self.endpoint.max_retries} attempts: {last_error}")

    def compress(self, evidence_texts: list[str]) -> str:
        prompt = STAGE1_TEMPLATE.format(evidence="\n".join(evidence_texts))
        return self.generate(prompt)

    def stitch(self, bin_summaries: dict[str, str], stats: dict[str, dict]) -> str:
        fields = {}
        for name in BIN_ORDER:
            s = stats.get(name, {"pct": 0.0, "count": 0})
            fields[f"{name}_pct"] = s["pct"]
            fields[f"{name}_count"] = s["count"]
            fields[f"{name}_summary"] = bin_summaries.get(name, "")
        return self.generate(STAGE2_TEMPLATE.format(**fields))

    def polish(self, draft: str) -> str:
        return self.generate(STAGE3_TEMPLATE.format(draft=draft))


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------


def _bin_stats(bins: SupportBins) -> dict[str, dict]:
    total = len(bins.high) + len(bins.mid) + len(bins.low)
    stats = {}
    for name in BIN_ORDER:
        count = len(bins.sentences(name))
        stats[name] = {"count": count, "pct": 100.0 * count / total if total else 0.0}
    return stats


def compress_bins(
    bins: SupportBins,
    text_by_id: dict[int, str],
    rewriter,
) -> tuple[dict[str, str], bool]:
    """Compress each non-empty bin; empty bins are omitted.

    Endpoint failures fall back to the stub per bin; the returned flag says
    whether any fallback happened (the artifact is then marked degraded).
    """
    stub = StubRewriter()
    summaries: dict[str, str] = {}
    degraded = False
    for name in BIN_ORDER:
        ids = bins.sentences(name)
        if not ids:
            continue
        texts = [text_by_id[sid] for sid in ids]
        try:
            summaries[name] = rewriter.compress(texts)
        except RewriterError:
            summaries[name] = stub.compress(texts)
            degraded = True
    return summaries, degraded


def stitch_and_polish(
    bin_summaries: dict[str, str],
    stats: dict[str, dict],
    rewriter,
) -> tuple[str, str, bool]:
    """Stitch bin blocks into a draft, then polish into the final text."""
    if not bin_summaries:
        raise ValueError("no bin summaries to stitch")
    stub = StubRewriter()
    degraded = False
    try:
        draft = rewriter.stitch(bin_summaries, stats)
    except RewriterError:
        draft = stub.stitch(bin_summaries, stats)
        degraded = True
    try:
        final = rewriter.polish(draft)
    except RewriterError:
        final = stub.polish(draft)
        degraded = True
    return draft, final, degraded


def g_cos(w_hat: np.ndarray, z: np.ndarray) -> float:
    """Cosine alignment between a preference vector and an aspect profile."""
    w = np.asarray(w_hat, dtype=np.float64)
    v = np.asarray(z, dtype=np.float64)
    nw, nv = np.linalg.norm(w), np.linalg.norm(v)
    if nw == 0 or nv == 0:
        raise ValueError("g_cos undefined for zero vectors")
    return float(w @ v / (nw * nv))


def summarize(
    selected: SelectedEvidence,
    phi_by_id: dict[int, np.ndarray],
    reviewer_by_id: dict[int, str],
    text_by_id: dict[int, str],
    w_hat: np.ndarray,
    z: np.ndarray,
    rewriter=None,
) -> SummaryArtifact:
    """Run the three-stage composition and package the artifact."""
    rewriter = rewriter or StubRewriter()
    bins = bin_by_support(selected, phi_by_id, reviewer_by_id)
    stats = _bin_stats(bins)
    bin_summaries, degraded1 = compress_bins(bins, text_by_id, rewriter)
    draft, final, degraded2 = stitch_and_polish(bin_summaries, stats, rewriter)
    return SummaryArtifact(
        bin_summaries=bin_summaries,
        draft=draft,
        final=final,
        provenance={name: list(bins.sentences(name)) for name in BIN_ORDER},
        g_cos=g_cos(w_hat, z),
        degraded=degraded1 or degraded2,
    )
