import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prefer.aspects import (
    AspectModel,
    EmbeddingMatrix,
    _lloyd,
    aspect_mass,
    assign_from_reduced,
    calibrate_tau,
    discover_aspects,
    fit_kmeans,
    fit_pca,
    k_selection_report,
    load_embeddings,
    load_model,
    nearest_centroid_gaps,
    normalize_rows,
    normalized_entropy,
    save_embeddings,
    save_model,
    soft_assign,
    user_profiles,
)


def norm_emb(data):
    return normalize_rows(EmbeddingMatrix(np.asarray(data, dtype=np.float64)))


class TestPca:
    def test_collinear_points_single_component(self):
        line = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [-1.0, -1.0]])
        emb = EmbeddingMatrix(line / np.linalg.norm(line, axis=1)[:, None], normalized=True)
        # normalized collinear points collapse to two antipodal locations
        pca = fit_pca(emb, variance_target=0.999)
        assert pca.m == 1
        assert pca.explained_variance[0] > 0

    def test_identical_rows_error(self):
        emb = EmbeddingMatrix(np.tile([0.6, 0.8], (5, 1)), normalized=True)
        with pytest.raises(ValueError, match="variance"):
            fit_pca(emb, m=1)

    def test_m_exceeding_rank_names_rank(self):
        rng = np.random.default_rng(0)
        base = rng.standard_normal((10, 2))
        data = np.hstack([base, base @ rng.standard_normal((2, 3))])  # rank 2 after centering
        emb = norm_emb(data)
        with pytest.raises(ValueError, match="rank"):
            fit_pca(emb, m=5)

    def test_full_rank_reconstruction(self):
        rng = np.random.default_rng(1)
        emb = norm_emb(rng.standard_normal((20, 6)))
        pca = fit_pca(emb, variance_target=1.0)
        centered = emb.data - pca.mean
        rebuilt = pca.backproject(pca.project(emb.data))
        assert np.abs(rebuilt - centered).max() < 1e-6

    def test_variance_target_smallest_m(self):
        rng = np.random.default_rng(2)
        emb = norm_emb(rng.standard_normal((50, 8)))
        pca = fit_pca(emb, variance_target=0.7)
        var = None
        full = fit_pca(emb, variance_target=1.0)
        cum = np.cumsum(full.explained_variance) / full.explained_variance.sum()
        expected_m = int(np.searchsorted(cum, 0.7 - 1e-12) + 1)
        assert pca.m == expected_m
        assert np.all(np.diff(pca.explained_variance) <= 1e-12)

    def test_m_and_target_mutually_exclusive(self):
        emb = norm_emb(np.random.default_rng(3).standard_normal((5, 3)))
        with pytest.raises(ValueError):
            fit_pca(emb, m=2, variance_target=0.5)
        with pytest.raises(ValueError):
            fit_pca(emb)


class TestKMeans:
    def test_two_blobs_exact_means(self):
        pts = np.array([[0.0, 0.0], [0.2, 0.0], [10.0, 10.0], [10.2, 10.0]])
        res = fit_kmeans(pts, k=2, n_init=4, seed=0)
        # oracle: best 2-partition by brute force over all assignments
        best = None
        for labels in itertools.product([0, 1], repeat=4):
            if len(set(labels)) < 2:
                continue
            cost = 0.0
            for c in (0, 1):
                members = pts[[i for i, l in enumerate(labels) if l == c]]
                cost += float(((members - members.mean(axis=0)) ** 2).sum())
            if best is None or cost < best[0]:
                best = (cost, labels)
        _, labels = best
        expected = {tuple(pts[[i for i, l in enumerate(labels) if l == c]].mean(axis=0)) for c in (0, 1)}
        got = {tuple(c) for c in res.centroids}
        assert got == expected

    def test_k1_is_global_mean(self):
        rng = np.random.default_rng(4)
        pts = rng.standard_normal((12, 3))
        res = fit_kmeans(pts, k=1, n_init=2, seed=0)
        assert np.allclose(res.centroids[0], pts.mean(axis=0), atol=1e-12)

    def test_k_exceeds_points_error(self):
        with pytest.raises(ValueError):
            fit_kmeans(np.zeros((3, 2)), k=4)

    def test_deterministic_for_seed(self):
        rng = np.random.default_rng(5)
        pts = rng.standard_normal((40, 4))
        a = fit_kmeans(pts, k=5, n_init=3, seed=11)
        b = fit_kmeans(pts, k=5, n_init=3, seed=11)
        assert np.array_equal(a.centroids, b.centroids)
        assert a.inertia == b.inertia

    def test_inertia_nonincreasing(self):
        rng = np.random.default_rng(6)
        pts = rng.standard_normal((100, 5))
        res = fit_kmeans(pts, k=6, n_init=2, seed=0)
        hist = np.array(res.inertia_history)
        assert np.all(np.diff(hist) <= 1e-9)

    def test_empty_cluster_reseeded_from_farthest(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]])
        init = np.array([[5.0, 0.0], [100.0, 0.0]])  # second cluster starts empty
        centers, labels, inertia, _ = _lloyd(pts, init.copy(), max_iter=50)
        assert len(set(labels.tolist())) == 2
        assert inertia < 30.0

    def test_reference_configuration_runs(self):
        rng = np.random.default_rng(7)
        pts = rng.standard_normal((200, 17))
        res = fit_kmeans(pts, k=10, n_init=10, seed=0)
        assert res.centroids.shape == (10, 17)


class TestTauCalibration:
    def _sample_with_gaps(self, gaps):
        # centroids at 0 and (1, 0); point at x has gap 1 - 2x
        centroids = np.array([[0.0, 0.0], [1.0, 0.0]])
        pts = np.array([[(1.0 - g) / 2.0, 0.0] for g in gaps])
        return pts, centroids

    def test_direct_substitution(self):
        pts, cents = self._sample_with_gaps([0.3, 0.5, 0.7])
        tau = calibrate_tau(pts, cents, r=10.0)
        assert tau == pytest.approx(math.log(10.0) / 0.5, rel=1e-9)
        assert tau == pytest.approx(4.60517, abs=1e-5)

    def test_single_point(self):
        pts, cents = self._sample_with_gaps([0.4])
        tau = calibrate_tau(pts, cents, r=7.0)
        assert tau == pytest.approx(math.log(7.0) / 0.4, rel=1e-9)

    def test_even_count_median_is_midpoint(self):
        pts, cents = self._sample_with_gaps([0.2, 0.4, 0.6, 0.8])
        tau = calibrate_tau(pts, cents, r=10.0)
        assert tau == pytest.approx(math.log(10.0) / 0.5, rel=1e-9)

    def test_zero_gap_errors(self):
        pts, cents = self._sample_with_gaps([0.0])
        with pytest.raises(ValueError, match="gap"):
            calibrate_tau(pts, cents, r=10.0)

    def test_invalid_inputs(self):
        pts, cents = self._sample_with_gaps([0.5])
        with pytest.raises(ValueError):
            calibrate_tau(pts, cents, r=1.0)
        with pytest.raises(ValueError):
            calibrate_tau(np.empty((0, 2)), cents)
        with pytest.raises(ValueError):
            nearest_centroid_gaps(pts, cents[:1])

    def test_median_gap_point_hits_ratio_exactly(self):
        pts, cents = self._sample_with_gaps([0.1, 0.5, 0.9])
        r = 10.0
        tau = calibrate_tau(pts, cents, r=r)
        phi = assign_from_reduced(cents, tau, np.array([[0.25, 0.0]]))[0]  # gap 0.5
        top = np.sort(phi)[::-1]
        assert top[0] / top[1] == pytest.approx(r, abs=1e-6)


class TestSoftAssign:
    def test_equidistant_uniform(self):
        cents = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        phi = assign_from_reduced(cents, tau=3.0, reduced=np.zeros((1, 2)))[0]
        assert np.allclose(phi, 0.25, atol=1e-12)

    def test_two_centroid_ratio(self):
        cents = np.array([[0.0, 0.0], [1.0, 0.0]])
        phi = assign_from_reduced(cents, tau=math.log(9.0), reduced=np.array([[0.0, 0.0]]))[0]
        assert phi == pytest.approx([0.9, 0.1], abs=1e-12)

    def test_large_tau_one_hot(self):
        cents = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        phi = assign_from_reduced(cents, tau=1e6, reduced=np.array([[0.05, 0.0]]))[0]
        assert phi[0] > 1.0 - 1e-12

    def test_nonfinite_error(self):
        cents = np.array([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            assign_from_reduced(cents, 1.0, np.array([[np.nan, 0.0]]))

    @given(
        arrays(np.float64, (6, 3), elements=st.floats(-5, 5)),
        st.floats(0.1, 20.0),
    )
    @settings(max_examples=60)
    def test_simplex_and_ratio_identity(self, pts, tau):
        cents = np.array([[2.0, 0.0, 0.0], [-2.0, 1.0, 0.0], [0.0, -2.0, 1.0]])
        phi = assign_from_reduced(cents, tau, pts)
        assert np.all(phi >= 0)
        assert np.abs(phi.sum(axis=1) - 1.0).max() < 1e-9
        gaps = nearest_centroid_gaps(pts, cents)
        for row, gap in zip(phi, gaps):
            top = np.sort(row)[::-1]
            if top[1] < 1e-12 or not np.isfinite(np.exp(tau * gap)):
                continue
            assert top[0] / top[1] == pytest.approx(np.exp(tau * gap), rel=1e-6)

    def test_soft_assign_projects_through_pca(self):
        rng = np.random.default_rng(8)
        emb = norm_emb(rng.standard_normal((30, 5)))
        model, reduced = discover_aspects(emb, k=3, variance_target=0.95, seed=0, r=10.0)
        phi_rows = soft_assign(model, emb.data)
        expected = assign_from_reduced(model.centroids, model.tau, reduced)
        assert np.allclose(phi_rows, expected, atol=1e-12)
        single = soft_assign(model, emb.data[0])
        assert single.shape == (3,)
        assert np.allclose(single, phi_rows[0], atol=1e-12)


class TestPersistence:
    def test_embedding_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        data = rng.standard_normal((7, 4)).astype(np.float32)
        path = tmp_path / "vecs.bin"
        save_embeddings(EmbeddingMatrix(data), path)
        loaded = load_embeddings(path)
        assert loaded.rows == 7 and loaded.dim == 4
        assert np.array_equal(loaded.data.astype(np.float32), data)

    def test_embedding_payload_size_checked(self, tmp_path):
        path = tmp_path / "vecs.bin"
        path.write_bytes(b'{"rows": 2, "dim": 2, "dtype": "f32le"}\n' + b"\x00" * 10)
        with pytest.raises(ValueError, match="bytes"):
            load_embeddings(path)

    def test_model_round_trip(self, tmp_path):
        rng = np.random.default_rng(10)
        emb = norm_emb(rng.standard_normal((40, 6)))
        model, _ = discover_aspects(emb, k=4, variance_target=0.9, seed=1, r=10.0)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert np.array_equal(loaded.centroids, model.centroids)
        assert np.array_equal(loaded.pca.basis, model.pca.basis)
        assert loaded.tau == model.tau and loaded.k == model.k and loaded.m == model.m

    def test_non_orthonormal_basis_rejected(self, tmp_path):
        rng = np.random.default_rng(11)
        emb = norm_emb(rng.standard_normal((20, 4)))
        model, _ = discover_aspects(emb, k=3, variance_target=0.9, seed=1, r=10.0)
        path = tmp_path / "model.json"
        save_model(model, path)
        import json

        doc = json.loads(path.read_text())
        doc["pca_basis"] = (np.asarray(doc["pca_basis"]) * 2.0).tolist()
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="orthonormal"):
            load_model(path)

    def test_model_invariants(self):
        with pytest.raises(ValueError):
            AspectModel(pca=None, centroids=np.zeros((1, 2)), tau=1.0)


class TestDiagnostics:
    def test_single_sentence_user(self):
        phi = np.array([[0.7, 0.2, 0.1], [0.1, 0.8, 0.1]])
        profiles = user_profiles(phi, ["alice", "bob"])
        alice = next(p for p in profiles if p.user_id == "alice")
        assert np.allclose(alice.w_hat_empirical, phi[0])

    def test_entropy_extremes(self):
        assert normalized_entropy(np.full(5, 0.2)) == pytest.approx(1.0, abs=1e-12)
        assert normalized_entropy(np.array([1.0, 0.0, 0.0])) == 0.0

    def test_masses_sum_to_one(self):
        rng = np.random.default_rng(12)
        phi = rng.dirichlet(np.ones(4), size=25)
        mass = aspect_mass(phi)
        assert mass.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(mass >= 0)

    def test_k_selection_report(self):
        rng = np.random.default_rng(13)
        blobs = np.concatenate([rng.normal(c, 0.1, size=(30, 3)) for c in (0.0, 3.0, 6.0)])
        rows = k_selection_report(blobs, [2, 3, 4], n_init=3, seed=0)
        assert [r.k for r in rows] == [2, 3, 4]
        best = max(rows, key=lambda r: r.silhouette)
        assert best.k == 3
        for r in rows:
            assert np.isfinite(r.calinski_harabasz) and np.isfinite(r.davies_bouldin)

    def test_mismatched_user_ids(self):
        with pytest.raises(ValueError):
            user_profiles(np.ones((2, 3)) / 3, ["only-one"])
