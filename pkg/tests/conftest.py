import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and rep.failed and "test_acceptance" in item.nodeid:
        print(f"\nACCEPTANCE {item.name.removeprefix('test_').replace('_', '-')}: FAIL")

from prefer.aspects import discover_aspects, normalize_rows
from prefer.selection import EvidenceCandidate
from prefer.session import build_catalog
from prefer.synth import SyntheticSpec, make_synthetic_corpus


@pytest.fixture(scope="session")
def small_catalog():
    """Compact pipeline catalog for service / engine tests."""
    tables, emb = make_synthetic_corpus(
        SyntheticSpec(products=2, sentences_per_product=60, reviewers_per_product=12, seed=5)
    )
    model, _ = discover_aspects(normalize_rows(emb), k=10, variance_target=0.9, seed=3, r=10.0)
    return build_catalog(tables, emb, model)


@pytest.fixture(scope="session")
def stock_catalog():
    """The canned desk-scale catalog used by the stock experiments."""
    from prefer import experiments

    return experiments.acceptance_catalog()


def make_candidates(phi_rows, vectors, tokens=None, ids=None):
    """Hand-built candidate lists for selection unit tests."""
    phi_rows = [np.asarray(p, dtype=np.float64) for p in phi_rows]
    vectors = [np.asarray(v, dtype=np.float64) for v in vectors]
    n = len(phi_rows)
    tokens = tokens or [1] * n
    ids = ids if ids is not None else list(range(n))
    return [
        EvidenceCandidate(sentence_id=ids[i], phi=phi_rows[i], reduced_vec=vectors[i], token_count=tokens[i])
        for i in range(n)
    ]


def random_instance(rng, n, k_dim=4, nonneg=False):
    """Random selection instance: relevances via phi, sims via unit vectors."""
    phi = rng.dirichlet(np.ones(k_dim), size=n)
    vecs = rng.standard_normal((n, 6))
    if nonneg:
        vecs = np.abs(vecs) + 1e-3
    tokens = rng.integers(1, 12, size=n)
    return phi, vecs, tokens
