"""Canned desk-scale experiment definitions.

These are the stock stationary and drift runs used by the verification
suite and the runnable scripts: a K=10 synthetic corpus (3 products x 200
sentences), a feedback user at gamma=8 / sigma=0.05 over 10 seeds, and the
four selection arms.  The drift run keeps a slower step-size decay: with a
moving comparator, late-round plasticity is what lets the estimate track
the change (the dynamic bound's optimal tuning grows with the path length).
"""

from __future__ import annotations

import numpy as np

from .aspects import AspectModel, discover_aspects, normalize_rows
from .preference import AspectProfileConfig, BoundParams
from .selection import SelectionConfig
from .session import ProductCatalog, build_catalog
from .simulate import (
    ALL_ARMS,
    ARM_PREFER_GUMBEL,
    ARM_PREFER_MMR,
    DriftSchedule,
    ExperimentConfig,
    FeedbackOracle,
)
from .synth import SyntheticSpec, make_synthetic_corpus

K = 10
PRODUCTS = ["p0", "p1", "p2"]
SEEDS = list(range(10))
STATIONARY_ROUNDS = 100
DRIFT_ROUNDS = 200
TARGET_ASPECT = 3
DRIFT_FROM, DRIFT_TO = 6, 5
DRIFT_WINDOW = (80, 120)


def acceptance_corpus():
    return make_synthetic_corpus(SyntheticSpec(seed=0))


def acceptance_catalog() -> ProductCatalog:
    tables, emb = acceptance_corpus()
    model, _ = discover_aspects(normalize_rows(emb), k=K, variance_target=0.9, seed=7, r=10.0)
    return build_catalog(tables, emb, model)


def acceptance_model() -> tuple[AspectModel, np.ndarray]:
    _, emb = acceptance_corpus()
    return discover_aspects(normalize_rows(emb), k=K, variance_target=0.9, seed=7, r=10.0)


def _selection() -> SelectionConfig:
    return SelectionConfig(lam=0.95, max_sentences=3, beta_max=50.0, c_beta=2.0)


def one_hot(k: int, idx: int) -> np.ndarray:
    w = np.zeros(k)
    w[idx] = 1.0
    return w


def stationary_config(out_dir: str | None = None, arms: list[str] | None = None) -> ExperimentConfig:
    return ExperimentConfig(
        products=list(PRODUCTS),
        rounds=STATIONARY_ROUNDS,
        seeds=list(SEEDS),
        arms=list(arms or ALL_ARMS),
        selection=_selection(),
        preference={"eta0": 6.5, "c_eta": 1.0, "baseline_kind": "ema", "ema_rho": 0.1, "clip_c": 0.4},
        profile=AspectProfileConfig(),
        oracle=FeedbackOracle(w_true=one_hot(K, TARGET_ASPECT), gamma=8.0, sigma=0.05),
        bounds=BoundParams(c=1.0, delta=1e-4, c_eta=1.0),
        out_dir=out_dir,
    )


def drift_config(out_dir: str | None = None, arms: list[str] | None = None) -> ExperimentConfig:
    schedule = DriftSchedule(
        w_start=one_hot(K, DRIFT_FROM),
        w_end=one_hot(K, DRIFT_TO),
        t_begin=DRIFT_WINDOW[0],
        t_end=DRIFT_WINDOW[1],
    )
    return ExperimentConfig(
        products=list(PRODUCTS),
        rounds=DRIFT_ROUNDS,
        seeds=list(SEEDS),
        arms=list(arms or [ARM_PREFER_MMR, ARM_PREFER_GUMBEL]),
        selection=_selection(),
        preference={"eta0": 3.0, "c_eta": 0.01, "baseline_kind": "ema", "ema_rho": 0.22, "clip_c": 0.4},
        profile=AspectProfileConfig(),
        oracle=FeedbackOracle(drift=schedule, gamma=8.0, sigma=0.05),
        bounds=BoundParams(c=1.0, delta=1e-4, c_eta=0.01),
        out_dir=out_dir,
    )
