"""Controlled feedback experiments: oracle users, drift, arms, and CSVs.

A hidden (possibly drifting) preference vector rates each round's evidence
profile through a noisy logistic channel.  The runner plays the interaction
loop for every (arm, seed) pair, keeps regret ledgers with bound
evaluations, and emits deterministic per-seed CSVs plus across-seed
aggregates with min/max bands.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import rng
from .aspects import load_embeddings, load_model
from .corpus import load_tables
from .preference import (
    AspectProfileConfig,
    BoundParams,
    PreferenceState,
    RegretLedger,
    alignment_metrics,
    uniform_state,
)
from .selection import MODE_DETERMINISTIC, MODE_GUMBEL, SelectionConfig, select
from .session import ProductCatalog, SessionEngine, build_catalog
from .summarize import g_cos

ARM_STATIC_MMR = "Static-MMR"
ARM_STATIC_GUMBEL = "Static-Gumbel"
ARM_PREFER_MMR = "PREFER-MMR"
ARM_PREFER_GUMBEL = "PREFER-Gumbel"
ALL_ARMS = (ARM_STATIC_MMR, ARM_STATIC_GUMBEL, ARM_PREFER_MMR, ARM_PREFER_GUMBEL)

CSV_COLUMNS = [
    "round", "arm", "seed", "f", "b", "f_tilde", "loss", "loss_comparator",
    "regret_cum", "regret_avg", "bound_avg", "A_pref", "A_evid",
    "min_coord_pre", "min_coord_post", "V_T",
]

AGG_METRICS = ["f", "regret_avg", "bound_avg", "A_pref", "A_evid", "min_coord_post"]


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


@dataclass
class DriftSchedule:
    w_start: np.ndarray
    w_end: np.ndarray
    t_begin: int
    t_end: int

    def __post_init__(self):
        self.w_start = np.asarray(self.w_start, dtype=np.float64)
        self.w_end = np.asarray(self.w_end, dtype=np.float64)
        if self.t_begin > self.t_end:
            raise ValueError("t_begin must be <= t_end")

    def rho(self, t: int) -> float:
        if t < self.t_begin:
            return 0.0
        if t >= self.t_end:
            return 1.0
        return (t - self.t_begin) / (self.t_end - self.t_begin)


def drift_preference(schedule: DriftSchedule, t: int) -> np.ndarray:
    """Convex combination of the endpoints; on the simplex by construction."""
    r = schedule.rho(t)
    return (1.0 - r) * schedule.w_start + r * schedule.w_end


@dataclass
class FeedbackOracle:
    """Hidden rating user: logistic feedback on evidence-profile utility."""

    w_true: np.ndarray | None = None
    drift: DriftSchedule | None = None
    gamma: float = 8.0
    sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if (self.w_true is None) == (self.drift is None):
            raise ValueError("specify exactly one of w_true and drift")
        if self.w_true is not None:
            self.w_true = np.asarray(self.w_true, dtype=np.float64)
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    def preference_at(self, t: int) -> np.ndarray:
        if self.drift is not None:
            return drift_preference(self.drift, t)
        assert self.w_true is not None
        return self.w_true


def oracle_feedback(oracle: FeedbackOracle, t: int, z: np.ndarray) -> float:
    """Noisy utility squashed to (0, 1).

    q = w_true(t).z + eps with eps ~ N(0, sigma^2) from the per-(seed, round)
    counter stream; f = sigmoid(gamma * (q - 1/K)), the 1/K term being the
    mean of a simplex preference vector.
    """
    w = oracle.preference_at(t)
    z = np.asarray(z, dtype=np.float64)
    eps = oracle.sigma * rng.normal(oracle.seed, rng.NOISE_STREAM, t) if oracle.sigma > 0 else 0.0
    q = float(w @ z) + eps
    x = oracle.gamma * (q - 1.0 / len(w))
    return float(1.0 / (1.0 + math.exp(-x)))


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    products: list[str]
    rounds: int
    seeds: list[int]
    arms: list[str] = field(default_factory=lambda: list(ALL_ARMS))
    corpus_path: str | None = None
    model_path: str | None = None
    embeddings_path: str | None = None
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    preference: dict = field(default_factory=dict)  # PreferenceState overrides
    profile: AspectProfileConfig = field(default_factory=AspectProfileConfig)
    oracle: FeedbackOracle | None = None
    bounds: BoundParams = field(default_factory=BoundParams)
    out_dir: str | None = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        for arm in self.arms:
            if arm not in ALL_ARMS:
                raise ValueError(f"unknown arm {arm!r}")


def config_from_json(doc: dict) -> ExperimentConfig:
    sel = SelectionConfig(
        lam=doc.get("selection", {}).get("lambda", 0.7),
        max_sentences=doc.get("selection", {}).get("max_sentences", 8),
        max_tokens=doc.get("selection", {}).get("max_tokens"),
        c_beta=doc.get("selection", {}).get("c_beta", 2.0),
        beta_max=doc.get("selection", {}).get("beta_max", 50.0),
        beta0=doc.get("selection", {}).get("beta0", 1.0),
    )
    prof_doc = doc.get("profile_weights", {})
    profile = AspectProfileConfig(
        scheme=prof_doc.get("scheme", "uniform"),
        beta_alpha=prof_doc.get("beta_alpha", 1.0),
        gamma_alpha=prof_doc.get("gamma_alpha", 1.0),
    )
    odoc = doc["oracle"]
    drift = None
    w_true = None
    if "drift" in odoc:
        ddoc = odoc["drift"]
        drift = DriftSchedule(
            w_start=np.asarray(ddoc["w_start"], dtype=np.float64),
            w_end=np.asarray(ddoc["w_end"], dtype=np.float64),
            t_begin=int(ddoc["t_begin"]),
            t_end=int(ddoc["t_end"]),
        )
    else:
        w_true = np.asarray(odoc["w_true"], dtype=np.float64)
    oracle = FeedbackOracle(
        w_true=w_true,
        drift=drift,
        gamma=float(odoc.get("gamma", 8.0)),
        sigma=float(odoc.get("sigma", 0.05)),
    )
    bdoc = doc.get("bounds", {})
    bounds = BoundParams(
        c=float(bdoc.get("c", 1.0)),
        delta=float(bdoc.get("delta", 1e-4)),
        c_eta=float(bdoc.get("c_eta", doc.get("preference", {}).get("c_eta", 1.0))),
        eta0=bdoc.get("eta0"),
    )
    return ExperimentConfig(
        products=list(doc["products"]),
        rounds=int(doc["rounds"]),
        seeds=[int(s) for s in doc["seeds"]],
        arms=list(doc.get("arms", ALL_ARMS)),
        corpus_path=doc.get("corpus"),
        model_path=doc.get("model"),
        embeddings_path=doc.get("embeddings"),
        selection=sel,
        preference=dict(doc.get("preference", {})),
        profile=profile,
        oracle=oracle,
        bounds=bounds,
        out_dir=doc.get("out_dir"),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    return config_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def load_catalog_for(cfg: ExperimentConfig) -> ProductCatalog:
    if not (cfg.corpus_path and cfg.model_path and cfg.embeddings_path):
        raise ValueError("config must name corpus, model, and embeddings files")
    tables = load_tables(cfg.corpus_path)
    emb = load_embeddings(cfg.embeddings_path)
    model = load_model(cfg.model_path)
    return build_catalog(tables, emb, model)


# ---------------------------------------------------------------------------
# the runner
# ---------------------------------------------------------------------------


def _arm_traits(arm: str) -> tuple[bool, str]:
    online = arm.startswith("PREFER")
    mode = MODE_GUMBEL if arm.endswith("Gumbel") else MODE_DETERMINISTIC
    return online, mode


def _make_state(k: int, overrides: dict) -> PreferenceState:
    return uniform_state(k, **overrides)


@dataclass
class ArmRun:
    arm: str
    seed: int
    rows: list[dict]
    ledger: RegretLedger
    final_state: PreferenceState
    w_trajectory: list[np.ndarray] = field(default_factory=list)  # post-update per round


@dataclass
class ExperimentResult:
    runs: list[ArmRun]

    def rows_for(self, arm: str) -> list[dict]:
        return [row for run in self.runs if run.arm == arm for row in run.rows]

    def final_metric(self, arm: str, column: str) -> list[float]:
        out = []
        for run in self.runs:
            if run.arm == arm:
                out.append(run.rows[-1][column])
        return out

    def seed_mean_curve(self, arm: str, column: str) -> np.ndarray:
        per_seed = [
            np.array([row[column] for row in run.rows])
            for run in self.runs
            if run.arm == arm
        ]
        return np.mean(per_seed, axis=0)


def run_single_arm(
    catalog: ProductCatalog,
    cfg: ExperimentConfig,
    arm: str,
    seed: int,
) -> ArmRun:
    online, mode = _arm_traits(arm)
    sel_cfg = replace(cfg.selection, mode=mode, seed=seed)
    state = _make_state(catalog.k, cfg.preference)
    oracle = replace(cfg.oracle, seed=seed)
    engine = SessionEngine(
        catalog,
        cfg.products,
        sel_cfg,
        state,
        profile_cfg=cfg.profile,
        online=online,
    )
    ledger = RegretLedger(cfg.bounds)
    rows: list[dict] = []
    trajectory: list[np.ndarray] = []
    for t in range(1, cfg.rounds + 1):
        art = engine.run_selection()
        w_used = engine.state.w_hat
        w_true_t = oracle.preference_at(t)
        f = oracle_feedback(oracle, t, art.z)
        outcome = engine.apply_round_feedback(f, art.z)
        ledger.record(
            t=t,
            f=f,
            b=outcome.baseline_before,
            f_tilde=outcome.f_tilde,
            w_hat=w_used,
            w_true=w_true_t,
            z=art.z,
            min_coord_pre=outcome.min_coord_pre,
            min_coord_post=outcome.min_coord_post,
        )
        trajectory.append(engine.state.w_hat.copy())
        v_t = ledger.path_length()
        regret_cum = ledger.dynamic_regret()
        a_pref, a_evid = alignment_metrics(w_true_t, engine.state.w_hat, art.z)
        rows.append(
            {
                "round": t,
                "arm": arm,
                "seed": seed,
                "f": f,
                "b": outcome.baseline_before,
                "f_tilde": outcome.f_tilde,
                "loss": ledger.records[-1].loss,
                "loss_comparator": ledger.records[-1].loss_comparator,
                "regret_cum": regret_cum,
                "regret_avg": regret_cum / t,
                "bound_avg": ledger.bound(t, v_t) / t,
                "A_pref": a_pref,
                "A_evid": a_evid,
                "min_coord_pre": outcome.min_coord_pre,
                "min_coord_post": outcome.min_coord_post,
                "V_T": v_t,
            }
        )
    return ArmRun(
        arm=arm, seed=seed, rows=rows, ledger=ledger, final_state=engine.state, w_trajectory=trajectory
    )


def run_experiment(cfg: ExperimentConfig, catalog: ProductCatalog | None = None) -> ExperimentResult:
    """Play every (arm, seed) pair; optionally write CSVs to cfg.out_dir."""
    if catalog is None:
        catalog = load_catalog_for(cfg)
    for pid in cfg.products:
        catalog.require(pid)
    if cfg.oracle is None:
        raise ValueError("experiment config needs an oracle")
    runs = []
    for arm in cfg.arms:
        for seed in cfg.seeds:
            runs.append(run_single_arm(catalog, cfg, arm, seed))
    result = ExperimentResult(runs)
    if cfg.out_dir:
        write_result_csvs(result, cfg.out_dir)
    return result


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="")
    os.replace(tmp, path)


def write_result_csvs(result: ExperimentResult, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    arms = []
    for run in result.runs:
        if run.arm not in arms:
            arms.append(run.arm)
        path = out / f"{run.arm}_seed{run.seed}.csv"
        lines = [",".join(CSV_COLUMNS)]
        for row in run.rows:
            lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)
    for arm in arms:
        arm_runs = [r for r in result.runs if r.arm == arm]
        rounds = len(arm_runs[0].rows)
        header = ["round", "arm"]
        for metric in AGG_METRICS:
            header += [f"{metric}_mean", f"{metric}_min", f"{metric}_max"]
        lines = [",".join(header)]
        for i in range(rounds):
            cells = [str(i + 1), arm]
            for metric in AGG_METRICS:
                values = np.array([r.rows[i][metric] for r in arm_runs])
                cells += [repr(float(values.mean())), repr(float(values.min())), repr(float(values.max()))]
            lines.append(",".join(cells))
        path = out / f"{arm}_agg.csv"
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# profile heterogeneity comparison
# ---------------------------------------------------------------------------


@dataclass
class ProfileEntry:
    profile: np.ndarray
    sentence_ids: list[int]
    g_cos: float


@dataclass
class ProfileComparison:
    entries: list[ProfileEntry]
    jaccard: np.ndarray  # pairwise evidence overlap

    def overlap(self, i: int, j: int) -> float:
        return float(self.jaccard[i, j])


def compare_profiles(
    catalog: ProductCatalog,
    product_id: str,
    profiles: list[np.ndarray],
    sel_cfg: SelectionConfig,
    profile_cfg: AspectProfileConfig | None = None,
) -> ProfileComparison:
    """One selection per target profile; report alignment and overlap."""
    cands = catalog.require(product_id)
    if len(cands) < sel_cfg.max_sentences:
        raise ValueError("product has fewer sentences than the selection budget")
    entries = []
    from .preference import aspect_profile as _profile

    for w in profiles:
        w = np.asarray(w, dtype=np.float64)
        selected = select(cands, w, sel_cfg, round_t=1)
        z = _profile(selected, catalog.phi_by_id, profile_cfg or AspectProfileConfig())
        entries.append(ProfileEntry(profile=w, sentence_ids=selected.sentence_ids, g_cos=g_cos(w, z)))
    n = len(entries)
    jac = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = set(entries[i].sentence_ids), set(entries[j].sentence_ids)
            union = a | b
            jac[i, j] = jac[j, i] = len(a & b) / len(union) if union else 1.0
    return ProfileComparison(entries=entries, jaccard=jac)
