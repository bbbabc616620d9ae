"""Budgeted evidence selection: greedy MMR and its Gumbel-perturbed variant.

Both extractors grow the selected set one sentence at a time, scoring each
feasible candidate by

    a(j) = lambda * relevance(j) - (1 - lambda) * m(j)

where the cached redundancy m(j) starts at zero and ratchets up to the
highest similarity against any selected sentence (anti-similar picks never
earn a bonus).  The incremental cache makes a full extraction of k
sentences over n candidates cost O(k * n) similarity work.
The Gumbel variant adds an independent standard-Gumbel perturbation to
beta_ext * a(j) at every step, which makes each pick a Boltzmann sample over
the feasible candidates at inverse temperature beta_ext.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng

MODE_DETERMINISTIC = "deterministic"
MODE_GUMBEL = "gumbel"


@dataclass(frozen=True)
class EvidenceCandidate:
    sentence_id: int
    phi: np.ndarray          # simplex aspect vector
    reduced_vec: np.ndarray  # PCA coordinates used for the similarity kernel
    token_count: int


@dataclass
class SelectionConfig:
    lam: float = 0.7
    max_sentences: int = 8
    max_tokens: int | None = None
    mode: str = MODE_DETERMINISTIC
    beta0: float = 1.0
    c_beta: float = 2.0
    beta_max: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must be within [0, 1]")
        if self.max_sentences < 1:
            raise ValueError("max_sentences must be >= 1")
        if self.beta_max < 1.0:
            raise ValueError("beta_max must be >= 1")


@dataclass
class SelectedEvidence:
    picks: list[tuple[int, float]]  # (sentence_id, marginal score) in pick order
    total_tokens: int
    aspect_profile: np.ndarray | None = None  # filled by the preference layer

    @property
    def sentence_ids(self) -> list[int]:
        return [sid for sid, _ in self.picks]

    @property
    def marginal_scores(self) -> list[float]:
        return [a for _, a in self.picks]


def _check_simplex(v: np.ndarray, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if np.any(v < -1e-12) or abs(float(v.sum()) - 1.0) > 1e-6:
        raise ValueError(f"{name} is not on the simplex")
    return v


def relevance(w_hat: np.ndarray, phi: np.ndarray) -> float:
    """Estimated user relevance of a sentence: dot of two simplex vectors."""
    w = _check_simplex(w_hat, "w_hat")
    p = _check_simplex(phi, "phi")
    if w.shape != p.shape:
        raise ValueError("dimension mismatch between w_hat and phi")
    return float(w @ p)


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two reduced sentence vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("similarity undefined for zero vectors")
    return float(a @ b / (na * nb))


def beta_schedule(cfg: SelectionConfig, round_t: int) -> float:
    """Exploration schedule: beta grows logarithmically, capped at beta_max."""
    return min(cfg.beta_max, cfg.beta0 + cfg.c_beta * math.log(round_t + 2))


def _prepare(candidates: list[EvidenceCandidate], w_hat: np.ndarray):
    if not candidates:
        raise ValueError("empty candidate list")
    order = sorted(range(len(candidates)), key=lambda i: candidates[i].sentence_id)
    cands = [candidates[i] for i in order]
    ids = np.array([c.sentence_id for c in cands])
    phi = np.stack([np.asarray(c.phi, dtype=np.float64) for c in cands])
    X = np.stack([np.asarray(c.reduced_vec, dtype=np.float64) for c in cands])
    tokens = np.array([c.token_count for c in cands])
    w = _check_simplex(w_hat, "w_hat")
    if phi.shape[1] != w.shape[0]:
        raise ValueError("aspect dimension mismatch")
    if np.any(phi < -1e-12) or np.any(np.abs(phi.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("candidate phi not on the simplex")
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero reduced vector among candidates")
    Xn = X / norms[:, None]
    rel = phi @ w
    return ids, rel, Xn, tokens


def _greedy(
    candidates: list[EvidenceCandidate],
    w_hat: np.ndarray,
    cfg: SelectionConfig,
    beta_ext: float | None,
    round_t: int,
) -> SelectedEvidence:
    ids, rel, Xn, tokens = _prepare(candidates, w_hat)
    n = len(ids)
    m_cache = np.zeros(n)
    picked = np.zeros(n, dtype=bool)
    picks: list[tuple[int, float]] = []
    total = 0
    for step in range(cfg.max_sentences):
        feasible = ~picked
        if cfg.max_tokens is not None:
            feasible &= (total + tokens) <= cfg.max_tokens
        if not feasible.any():
            break
        base = cfg.lam * rel - (1.0 - cfg.lam) * m_cache
        if beta_ext is None:
            eff = base
        else:
            noise = rng.gumbel(cfg.seed, rng.GUMBEL_STREAM, round_t, step, ids)
            eff = beta_ext * base + noise
        masked = np.where(feasible, eff, -np.inf)
        j = int(np.argmax(masked))  # first max wins: lowest sentence_id on ties
        picks.append((int(ids[j]), float(base[j])))
        total += int(tokens[j])
        picked[j] = True
        m_cache = np.maximum(m_cache, Xn @ Xn[j])
    return SelectedEvidence(picks=picks, total_tokens=total)


def select_mmr(
    candidates: list[EvidenceCandidate],
    w_hat: np.ndarray,
    cfg: SelectionConfig,
) -> SelectedEvidence:
    """Deterministic greedy extraction; argmax ties go to the lowest id."""
    return _greedy(candidates, w_hat, cfg, beta_ext=None, round_t=0)


def select_gumbel(
    candidates: list[EvidenceCandidate],
    w_hat: np.ndarray,
    cfg: SelectionConfig,
    round_t: int,
) -> SelectedEvidence:
    """Stochastic extraction with counter-seeded Gumbel perturbations.

    The perturbation of candidate j at a given step is a pure function of
    (cfg.seed, round_t, step, sentence_id), so runs replay exactly.
    """
    beta_ext = beta_schedule(cfg, round_t)
    return _greedy(candidates, w_hat, cfg, beta_ext=beta_ext, round_t=round_t)


def select(
    candidates: list[EvidenceCandidate],
    w_hat: np.ndarray,
    cfg: SelectionConfig,
    round_t: int,
) -> SelectedEvidence:
    if cfg.mode == MODE_DETERMINISTIC:
        return select_mmr(candidates, w_hat, cfg)
    if cfg.mode == MODE_GUMBEL:
        return select_gumbel(candidates, w_hat, cfg, round_t)
    raise ValueError(f"unknown selection mode {cfg.mode!r}")


def gumbel_step_noise(seed: int, round_t: int, step: int, ids: np.ndarray) -> np.ndarray:
    """The per-candidate Gumbel stream used by select_gumbel, batch-friendly.

    ``round_t``/``ids`` may be integer arrays; the result broadcasts, which
    lets Monte-Carlo checks draw many rounds in one vectorized call.
    """
    return rng.gumbel(seed, rng.GUMBEL_STREAM, round_t, step, ids)
