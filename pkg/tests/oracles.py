"""Independent reference implementations the tests check against.

Everything here recomputes results from first principles (no shared code
paths with the library internals being verified): selection by re-scanning
all pairwise similarities each step, set objectives by exhaustive
enumeration, and the mirror step by numerical constrained minimization.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize


def cosine_matrix(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    return (vectors / norms[:, None]) @ (vectors / norms[:, None]).T


def brute_force_mmr(
    rel: np.ndarray,
    sims: np.ndarray,
    tokens: np.ndarray,
    ids: np.ndarray,
    lam: float,
    k: int,
    max_tokens: int | None,
) -> list[int]:
    """Greedy selection recomputing max-similarity from scratch every step."""
    order = np.argsort(ids)
    rel, sims, tokens, ids = rel[order], sims[np.ix_(order, order)], tokens[order], ids[order]
    n = len(ids)
    chosen: list[int] = []
    total = 0
    for _ in range(k):
        best_j, best_score = None, None
        for j in range(n):
            if j in chosen:
                continue
            if max_tokens is not None and total + tokens[j] > max_tokens:
                continue
            # the cached redundancy score starts at zero and only grows, so
            # its stateless recomputation includes 0 in the max
            red = max([0.0] + [sims[i, j] for i in chosen])
            score = lam * rel[j] - (1.0 - lam) * red
            if best_score is None or score > best_score:
                best_j, best_score = j, score
        if best_j is None:
            break
        chosen.append(best_j)
        total += tokens[best_j]
    return [int(ids[j]) for j in chosen]


def set_objective(rel: np.ndarray, sims: np.ndarray, subset: tuple[int, ...], lam: float) -> float:
    """J(S) = lam * sum rel - (1 - lam) * sum of pairwise sims in S."""
    val = lam * sum(rel[i] for i in subset)
    members = list(subset)
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            val -= (1.0 - lam) * sims[members[a], members[b]]
    return val


def marginal_gain_table(rel: np.ndarray, sims: np.ndarray, lam: float) -> np.ndarray:
    """delta[mask, j] = J(S + j) - J(S) for every subset bitmask and j not in S."""
    n = len(rel)
    delta = np.full((1 << n, n), np.nan)
    for mask in range(1 << n):
        members = [i for i in range(n) if mask & (1 << i)]
        for j in range(n):
            if mask & (1 << j):
                continue
            delta[mask, j] = lam * rel[j] - (1.0 - lam) * sum(sims[i, j] for i in members)
    return delta


def subset_minimum(delta: np.ndarray, n: int) -> np.ndarray:
    """m[mask, j] = min over A subset of mask of delta[A, j] (subset-sum DP)."""
    m = delta.copy()
    m = np.where(np.isnan(m), np.inf, m)
    for bit in range(n):
        step = 1 << bit
        masks = np.flatnonzero(np.arange(1 << n) & step)
        m[masks] = np.minimum(m[masks], m[masks ^ step])
    return m


def kl_prox_solve(w: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray:
    """Numerically minimize eta*g.x + KL(x || w) over the simplex (SLSQP)."""
    k = len(w)

    def objective(x):
        return eta * float(grad @ x) + float(np.sum(x * np.log(x / w)))

    def jac(x):
        return eta * grad + np.log(x / w) + 1.0

    res = minimize(
        objective,
        x0=w.copy(),
        jac=jac,
        method="SLSQP",
        bounds=[(1e-15, 1.0)] * k,
        constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1.0, "jac": lambda x: np.ones(k)}],
        options={"maxiter": 500, "ftol": 1e-14},
    )
    if not res.success:
        raise RuntimeError(f"prox solve failed: {res.message}")
    return res.x


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())
