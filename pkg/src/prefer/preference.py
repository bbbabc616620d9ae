"""Online preference learning on the aspect simplex.

Per round: build the aspect profile z of the selected evidence, center the
scalar feedback against a running baseline, form the linear surrogate loss
l(w) = -f_tilde * w.z, and apply the entropic mirror-descent step, which on
the simplex reduces to the multiplicative (exponentiated-gradient) update

    w'_k  proportional to  w_k * exp(eta_t * f_tilde * z_k).

The ledger tracks per-round losses against the true preference sequence, the
l1 path length of that sequence, and evaluates the sublinear regret bounds
and their sample-complexity inversions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .selection import SelectedEvidence

BASELINE_MEAN = "mean"
BASELINE_EMA = "ema"

WEIGHT_UNIFORM = "uniform"
WEIGHT_UTIL = "util"
WEIGHT_RANK = "rank"
WEIGHT_BLEND = "blend"

INITIAL_BASELINE = 0.5  # midpoint of the feedback range


@dataclass
class PreferenceState:
    w_hat: np.ndarray
    round: int = 1
    eta0: float = 0.5
    c_eta: float = 1.0
    baseline_kind: str = BASELINE_EMA
    baseline_value: float = INITIAL_BASELINE
    ema_rho: float = 0.1
    clip_c: float = 1.0
    delta_floor: float = 1e-4
    project_to_floor: bool = False
    feedback_count: int = 0
    feedback_sum: float = 0.0

    def __post_init__(self):
        self.w_hat = np.asarray(self.w_hat, dtype=np.float64)
        if self.baseline_kind not in (BASELINE_MEAN, BASELINE_EMA):
            raise ValueError(f"unknown baseline kind {self.baseline_kind!r}")
        if not 0 < self.ema_rho <= 1:
            raise ValueError("ema_rho must be in (0, 1]")
        if self.clip_c <= 0:
            raise ValueError("clip_c must be positive")
        k = len(self.w_hat)
        if not 0 < self.delta_floor <= 1.0 / k:
            raise ValueError("delta_floor must be in (0, 1/K]")

    @property
    def k(self) -> int:
        return len(self.w_hat)


def uniform_state(k: int, **kwargs) -> PreferenceState:
    return PreferenceState(w_hat=np.full(k, 1.0 / k), **kwargs)


def eta_at(eta0: float, c_eta: float, t: int) -> float:
    """Step size at round t: larger early updates, stabilizing later ones."""
    return eta0 / math.sqrt(1.0 + c_eta * t)


# ---------------------------------------------------------------------------
# aspect profile
# ---------------------------------------------------------------------------


@dataclass
class AspectProfileConfig:
    scheme: str = WEIGHT_UNIFORM
    beta_alpha: float = 1.0
    gamma_alpha: float = 1.0


def aspect_profile(
    selected: SelectedEvidence,
    phi_by_id: dict[int, np.ndarray],
    cfg: AspectProfileConfig | None = None,
) -> np.ndarray:
    """Weighted average of the selected sentences' aspect vectors.

    Weight schemes: uniform; util (weight grows with the pick's marginal
    score); rank (weight decays with extraction position); blend (both).
    The result is stored on ``selected.aspect_profile`` and returned.
    """
    cfg = cfg or AspectProfileConfig()
    if not selected.picks:
        raise ValueError("empty selection has no aspect profile")
    scores = np.array(selected.marginal_scores)
    positions = np.arange(len(scores), dtype=np.float64)  # i - 1 for the i-th pick
    if cfg.scheme == WEIGHT_UNIFORM:
        logw = np.zeros(len(scores))
    elif cfg.scheme == WEIGHT_UTIL:
        logw = cfg.beta_alpha * scores
    elif cfg.scheme == WEIGHT_RANK:
        logw = -cfg.gamma_alpha * positions
    elif cfg.scheme == WEIGHT_BLEND:
        logw = cfg.beta_alpha * scores - cfg.gamma_alpha * positions
    else:
        raise ValueError(f"unknown weight scheme {cfg.scheme!r}")
    logw -= logw.max()
    alpha = np.exp(logw)
    alpha /= alpha.sum()
    phi = np.stack([np.asarray(phi_by_id[sid], dtype=np.float64) for sid in selected.sentence_ids])
    z = alpha @ phi
    selected.aspect_profile = z
    return z


# ---------------------------------------------------------------------------
# feedback centering and the update
# ---------------------------------------------------------------------------


def center_feedback(state: PreferenceState, f: float) -> tuple[float, PreferenceState]:
    """Center raw feedback against the baseline, then advance the baseline.

    f_tilde = clamp(f - b, -c, c).  The mean baseline is the running mean of
    past feedback (0.5 before any); the EMA baseline moves by rho toward f.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"feedback {f} outside [0, 1]")
    b = state.baseline_value
    f_tilde = float(np.clip(f - b, -state.clip_c, state.clip_c))
    if state.baseline_kind == BASELINE_MEAN:
        count = state.feedback_count + 1
        total = state.feedback_sum + f
        new_b = total / count
        new_state = replace(state, baseline_value=new_b, feedback_count=count, feedback_sum=total)
    else:
        new_b = (1.0 - state.ema_rho) * b + state.ema_rho * f
        new_state = replace(
            state,
            baseline_value=new_b,
            feedback_count=state.feedback_count + 1,
            feedback_sum=state.feedback_sum + f,
        )
    return f_tilde, new_state


def surrogate_loss(w: np.ndarray, f_tilde: float, z: np.ndarray) -> float:
    """Linear per-round loss: l(w) = -f_tilde * (w . z)."""
    return float(-f_tilde * (np.asarray(w) @ np.asarray(z)))


def surrogate_gradient(f_tilde: float, z: np.ndarray) -> np.ndarray:
    return -f_tilde * np.asarray(z, dtype=np.float64)


def omd_update(state: PreferenceState, f_tilde: float, z: np.ndarray) -> PreferenceState:
    """One multiplicative simplex step; increments the round counter.

    The exponent is stabilized by max subtraction.  The optional floor
    projection (off by default) clamps coordinates to >= delta_floor and
    renormalizes; normally interiority is only observed, not enforced.
    """
    w = state.w_hat
    if np.any(w <= 0):
        raise ValueError("preference estimate must be strictly positive")
    z = np.asarray(z, dtype=np.float64)
    eta = eta_at(state.eta0, state.c_eta, state.round)
    exponent = eta * f_tilde * z
    exponent -= exponent.max()
    new_w = w * np.exp(exponent)
    new_w /= new_w.sum()
    if state.project_to_floor:
        new_w = project_to_floor(new_w, state.delta_floor)
    return replace(state, w_hat=new_w, round=state.round + 1)


def project_to_floor(w: np.ndarray, delta: float) -> np.ndarray:
    """Project onto the simplex restricted to coordinates >= delta.

    Coordinates below the floor are pinned to it and the remaining mass is
    rescaled over the rest, repeating until no coordinate dips under.
    """
    w = np.asarray(w, dtype=np.float64).copy()
    k = len(w)
    if not 0 < delta <= 1.0 / k:
        raise ValueError("delta must be in (0, 1/K]")
    pinned = np.zeros(k, dtype=bool)
    for _ in range(k):
        low = (w < delta) & ~pinned
        if not low.any():
            break
        pinned |= low
        w[pinned] = delta
        free = ~pinned
        free_mass = 1.0 - delta * pinned.sum()
        total = w[free].sum()
        if total > 0:
            w[free] *= free_mass / total
    return w


@dataclass(frozen=True)
class FeedbackOutcome:
    state: PreferenceState
    f: float
    f_tilde: float
    baseline_before: float
    eta: float
    min_coord_pre: float
    min_coord_post: float


def apply_feedback(
    state: PreferenceState,
    f: float,
    z: np.ndarray,
    update: bool = True,
) -> FeedbackOutcome:
    """Center feedback and (unless frozen) apply the mirror-descent step."""
    baseline_before = state.baseline_value
    eta = eta_at(state.eta0, state.c_eta, state.round)
    min_pre = float(state.w_hat.min())
    f_tilde, state = center_feedback(state, f)
    if update:
        state = omd_update(state, f_tilde, z)
    return FeedbackOutcome(
        state=state,
        f=f,
        f_tilde=f_tilde,
        baseline_before=baseline_before,
        eta=eta,
        min_coord_pre=min_pre,
        min_coord_post=float(state.w_hat.min()),
    )


# ---------------------------------------------------------------------------
# divergences and alignment metrics
# ---------------------------------------------------------------------------


def kl_divergence(u: np.ndarray, w: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    mask = u > 0
    return float(np.sum(u[mask] * np.log(u[mask] / w[mask])))


def entropy_bregman(u: np.ndarray, w: np.ndarray) -> float:
    """Bregman divergence of the negative-entropy mirror map, from definition."""
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)

    def d(x):
        return float(np.sum(x * np.log(x)))

    grad_w = np.log(w) + 1.0
    return d(u) - d(w) - float(grad_w @ (u - w))


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine undefined for zero vectors")
    return float(u @ v / (nu * nv))


def alignment_metrics(w_true: np.ndarray, w_hat: np.ndarray, z: np.ndarray) -> tuple[float, float]:
    """(A_pref, A_evid): cosine of the truth with the estimate / the evidence."""
    return cosine(w_true, w_hat), cosine(w_true, z)


# ---------------------------------------------------------------------------
# regret ledger and bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundRecord:
    t: int
    f: float
    b: float
    f_tilde: float
    loss: float
    loss_comparator: float
    z: np.ndarray
    w_true: np.ndarray
    min_coord_pre: float
    min_coord_post: float


@dataclass
class BoundParams:
    c: float = 1.0
    delta: float = 1e-4
    c_eta: float = 1.0
    eta0: float | None = None  # None means the bound-optimal eta0

    def validate(self, k: int | None = None) -> None:
        hi = 1.0 / k if k else 1.0
        if not 0 < self.delta <= hi:
            raise ValueError("delta must be in (0, 1/K]")


class RegretLedger:
    def __init__(self, bound_params: BoundParams | None = None):
        self.records: list[RoundRecord] = []
        self.bound_params = bound_params or BoundParams()

    def record(
        self,
        t: int,
        f: float,
        b: float,
        f_tilde: float,
        w_hat: np.ndarray,
        w_true: np.ndarray,
        z: np.ndarray,
        min_coord_pre: float,
        min_coord_post: float,
    ) -> RoundRecord:
        rec = RoundRecord(
            t=t,
            f=f,
            b=b,
            f_tilde=f_tilde,
            loss=surrogate_loss(w_hat, f_tilde, z),
            loss_comparator=surrogate_loss(w_true, f_tilde, z),
            z=np.asarray(z, dtype=np.float64).copy(),
            w_true=np.asarray(w_true, dtype=np.float64).copy(),
            min_coord_pre=min_coord_pre,
            min_coord_post=min_coord_post,
        )
        self.records.append(rec)
        return rec

    def _upto(self, t: int | None) -> list[RoundRecord]:
        return self.records if t is None else self.records[:t]

    def dynamic_regret(self, t: int | None = None) -> float:
        recs = self._upto(t)
        return math.fsum(r.loss - r.loss_comparator for r in recs)

    def static_regret(self, w: np.ndarray, t: int | None = None) -> float:
        recs = self._upto(t)
        return math.fsum(r.loss - surrogate_loss(w, r.f_tilde, r.z) for r in recs)

    def path_length(self, t: int | None = None) -> float:
        """V_T: l1 path length of the true preference sequence.

        Accumulated with exact summation over per-coordinate absolute
        differences so clean drift segments come out without float drift.
        """
        recs = self._upto(t)
        if len(recs) < 2:
            return 0.0
        W = np.stack([r.w_true for r in recs])
        return math.fsum(np.abs(np.diff(W, axis=0)).ravel().tolist())

    def bound(self, t: int, v_t: float | None = None) -> float:
        if v_t is None:
            v_t = self.path_length(t)
        return dynamic_bound(self.bound_params, t, v_t)


def l_delta(delta: float) -> float:
    """Lipschitz constant of the entropy Bregman divergence on the delta-floor simplex."""
    return 1.0 + math.log(1.0 / delta)


def optimized_eta0(c: float, delta: float, c_eta: float, v_t: float = 0.0) -> float:
    a = math.log(1.0 / delta) + l_delta(delta) * v_t
    return math.sqrt(c_eta * a) / c


def dynamic_bound(params: BoundParams, t: int, v_t: float) -> float:
    """Cumulative regret bound against a drifting comparator at horizon t."""
    a = math.log(1.0 / params.delta) + l_delta(params.delta) * v_t
    eta0 = params.eta0 if params.eta0 is not None else math.sqrt(params.c_eta * a) / params.c
    return math.sqrt(1.0 + params.c_eta * t) * (a / eta0 + params.c**2 * eta0 / params.c_eta)


def static_bound(params: BoundParams, t: int) -> float:
    """Cumulative regret bound against the best fixed preference vector."""
    return dynamic_bound(params, t, v_t=0.0)


def _sample_complexity(c: float, delta: float, c_eta: float, eps: float, a: float) -> int:
    if eps <= 0:
        raise ValueError("target eps must be positive")
    rhs = (2.0 / eps**2) * (c**2 * a + math.sqrt(c**4 * a**2 + eps**2 * c**2 * a / c_eta))
    return max(1, math.ceil(rhs))


def static_sample_complexity(c: float, delta: float, c_eta: float, eps: float) -> int:
    """Smallest horizon guaranteeing average regret at most eps (fixed truth)."""
    return _sample_complexity(c, delta, c_eta, eps, math.log(1.0 / delta))


def dynamic_sample_complexity(c: float, delta: float, c_eta: float, eps: float, v_t: float) -> int:
    """Same inversion with the drift-inflated divergence budget."""
    a = math.log(1.0 / delta) + l_delta(delta) * v_t
    return _sample_complexity(c, delta, c_eta, eps, a)


# ---------------------------------------------------------------------------
# state snapshots (service persistence / replay)
# ---------------------------------------------------------------------------


def state_to_json(state: PreferenceState) -> dict:
    return {
        "w_hat": state.w_hat.tolist(),
        "round": state.round,
        "eta0": state.eta0,
        "c_eta": state.c_eta,
        "baseline_kind": state.baseline_kind,
        "baseline_value": state.baseline_value,
        "ema_rho": state.ema_rho,
        "clip_c": state.clip_c,
        "delta_floor": state.delta_floor,
        "project_to_floor": state.project_to_floor,
        "feedback_count": state.feedback_count,
        "feedback_sum": state.feedback_sum,
    }


def state_from_json(doc: dict) -> PreferenceState:
    return PreferenceState(
        w_hat=np.asarray(doc["w_hat"], dtype=np.float64),
        round=int(doc["round"]),
        eta0=float(doc["eta0"]),
        c_eta=float(doc["c_eta"]),
        baseline_kind=str(doc["baseline_kind"]),
        baseline_value=float(doc["baseline_value"]),
        ema_rho=float(doc["ema_rho"]),
        clip_c=float(doc["clip_c"]),
        delta_floor=float(doc["delta_floor"]),
        project_to_floor=bool(doc["project_to_floor"]),
        feedback_count=int(doc["feedback_count"]),
        feedback_sum=float(doc["feedback_sum"]),
    )
