"""Latent aspect space over sentence embeddings.

Pipeline: row-normalize embeddings, reduce with exact PCA, cluster with
Lloyd k-means (k-means++ restarts), calibrate a softmax temperature from the
median nearest-centroid gap, and map points to simplex-valued aspect vectors.
Also houses the clustering and per-user diagnostics used to pick K.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.metrics import (
    calinski_harabasz_score,
    davies_bouldin_score,
    silhouette_score,
)


@dataclass
class EmbeddingMatrix:
    data: np.ndarray  # (M, d)
    normalized: bool = False

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])


def normalize_rows(emb: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every row to unit l2 norm; zero rows are an error."""
    X = np.asarray(emb.data, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ValueError("cannot normalize zero embedding rows")
    return EmbeddingMatrix(X / norms[:, None], normalized=True)


def save_embeddings(emb: EmbeddingMatrix, path: str | Path) -> None:
    """Header line {"rows":M,"dim":d,"dtype":"f32le"} then raw row-major f32."""
    X = np.ascontiguousarray(emb.data, dtype="<f4")
    header = {"rows": int(X.shape[0]), "dim": int(X.shape[1]), "dtype": "f32le"}
    with Path(path).open("wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        fh.write(X.tobytes())


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    with Path(path).open("rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line.decode("utf-8"))
            rows, dim = int(header["rows"]), int(header["dim"])
            dtype = header["dtype"]
        except (json.JSONDecodeError, KeyError, ValueError) as e:
            raise ValueError(f"bad embedding header: {e}") from e
        if dtype != "f32le":
            raise ValueError(f"unsupported embedding dtype {dtype!r}")
        raw = fh.read()
    expected = rows * dim * 4
    if len(raw) != expected:
        raise ValueError(f"embedding payload is {len(raw)} bytes, expected {expected}")
    data = np.frombuffer(raw, dtype="<f4").reshape(rows, dim).astype(np.float64)
    return EmbeddingMatrix(data, normalized=False)


# ---------------------------------------------------------------------------
# PCA
# ---------------------------------------------------------------------------


@dataclass
class Pca:
    mean: np.ndarray                # (d,)
    basis: np.ndarray               # (m, d), orthonormal rows
    explained_variance: np.ndarray  # (m,), nonincreasing

    @property
    def m(self) -> int:
        return int(self.basis.shape[0])

    def project(self, X: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(X) - self.mean) @ self.basis.T

    def backproject(self, Y: np.ndarray) -> np.ndarray:
        """Map reduced coordinates back to the centered input space."""
        return np.atleast_2d(Y) @ self.basis


def fit_pca(
    emb: EmbeddingMatrix,
    m: int | None = None,
    variance_target: float | None = None,
) -> Pca:
    """Exact PCA of the mean-centered matrix via SVD.

    Exactly one of ``m`` and ``variance_target`` must be given.  With a
    variance target, the smallest component count whose cumulative explained
    variance reaches the target is used.  Requesting more components than the
    matrix rank is an error naming the achievable rank.
    """
    if not emb.normalized:
        raise ValueError("embeddings must be row-normalized before PCA")
    if (m is None) == (variance_target is None):
        raise ValueError("specify exactly one of m and variance_target")
    X = np.asarray(emb.data, dtype=np.float64)
    M, d = X.shape
    mean = X.mean(axis=0)
    Xc = X - mean
    U, S, Vt = np.linalg.svd(Xc, full_matrices=False)
    tol = S[0] * max(M, d) * np.finfo(np.float64).eps if S.size else 0.0
    rank = int(np.sum(S > tol))
    if rank == 0:
        raise ValueError("zero total variance: all embedding rows are identical")
    var = S**2 / max(M - 1, 1)
    if variance_target is not None:
        if not 0 < variance_target <= 1:
            raise ValueError("variance_target must be in (0, 1]")
        cum = np.cumsum(var) / var.sum()
        m = int(np.searchsorted(cum, variance_target - 1e-12) + 1)
        m = min(m, rank)
    assert m is not None
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > rank:
        raise ValueError(f"requested {m} components but achievable rank is {rank}")
    basis = Vt[:m].copy()
    # canonical sign: largest-magnitude entry of each component is positive
    flip = np.sign(basis[np.arange(m), np.argmax(np.abs(basis), axis=1)])
    flip[flip == 0] = 1.0
    basis *= flip[:, None]
    return Pca(mean=mean, basis=basis, explained_variance=var[:m])


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    inertia_history: list[float]


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(X**2, axis=1)[:, None]
        - 2.0 * X @ C.T
        + np.sum(C**2, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    M = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    first = int(rng.integers(M))
    centers[0] = X[first]
    closest = np.sum((X - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = int(rng.integers(M))
        else:
            cum = np.cumsum(closest)
            idx = int(np.searchsorted(cum, rng.random() * total))
            idx = min(idx, M - 1)
        centers[j] = X[idx]
        closest = np.minimum(closest, np.sum((X - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(
    X: np.ndarray, centers: np.ndarray, max_iter: int
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    k = centers.shape[0]
    labels = np.full(X.shape[0], -1)
    history: list[float] = []
    for _ in range(max_iter):
        d2 = _sq_dists(X, centers)
        new_labels = np.argmin(d2, axis=1)
        # re-seed empty clusters from the point farthest from its centroid
        counts = np.bincount(new_labels, minlength=k)
        if np.any(counts == 0):
            closest = d2[np.arange(X.shape[0]), new_labels]
            for empty in np.flatnonzero(counts == 0):
                far = int(np.argmax(closest))
                centers[empty] = X[far]
                closest[far] = 0.0
            d2 = _sq_dists(X, centers)
            new_labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(X.shape[0]), new_labels].sum())
        history.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = X[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
    d2 = _sq_dists(X, centers)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(X.shape[0]), labels].sum())
    return centers, labels, inertia, history


def fit_kmeans(
    reduced: np.ndarray,
    k: int,
    n_init: int = 10,
    seed: int = 0,
    max_iter: int = 300,
) -> KMeansResult:
    """Lloyd's algorithm with k-means++ restarts; best inertia wins.

    Deterministic for a fixed seed; inertia ties keep the lower restart index.
    """
    X = np.asarray(reduced, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("reduced matrix must be 2-D")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > X.shape[0]:
        raise ValueError(f"k={k} exceeds the number of points {X.shape[0]}")
    if n_init < 1:
        raise ValueError("n_init must be >= 1")
    best: KMeansResult | None = None
    for restart in range(n_init):
        rng = np.random.default_rng([seed, restart])
        init = _kmeans_pp_init(X, k, rng)
        centers, labels, inertia, history = _lloyd(X, init.copy(), max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(centers, labels, inertia, history)
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# temperature calibration and soft assignment
# ---------------------------------------------------------------------------


def nearest_centroid_gaps(reduced: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Per point: squared distance to 2nd-nearest centroid minus nearest."""
    d2 = _sq_dists(np.atleast_2d(reduced), np.asarray(centroids))
    if d2.shape[1] < 2:
        raise ValueError("need at least 2 centroids")
    part = np.partition(d2, 1, axis=1)
    return part[:, 1] - part[:, 0]


def calibrate_tau(reduced_sample: np.ndarray, centroids: np.ndarray, r: float = 10.0) -> float:
    """Temperature making the median-gap point's top-two ratio equal r.

    tau = log(r) / median(gap), where gap_i is the squared-distance margin
    between the two nearest centroids.  A zero median gap is an error: the
    sample cannot pin the temperature.
    """
    if r <= 1:
        raise ValueError("r must be > 1")
    sample = np.atleast_2d(reduced_sample)
    if sample.shape[0] == 0:
        raise ValueError("empty calibration sample")
    gaps = nearest_centroid_gaps(sample, centroids)
    med = float(np.median(gaps))
    if med <= 0:
        raise ValueError("median nearest-centroid gap is zero; perturb data or change K")
    return float(np.log(r) / med)


@dataclass
class AspectModel:
    pca: Pca
    centroids: np.ndarray  # (K, m)
    tau: float
    k: int = field(init=False)

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        self.k = int(self.centroids.shape[0])
        if self.k < 2:
            raise ValueError("need at least 2 aspects")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not np.all(np.isfinite(self.centroids)):
            raise ValueError("centroids must be finite")

    @property
    def m(self) -> int:
        return self.pca.m


def assign_from_reduced(centroids: np.ndarray, tau: float, reduced: np.ndarray) -> np.ndarray:
    """Simplex aspect weights: phi_k proportional to exp(-tau * d^2(point, c_k)).

    Stabilized by subtracting the max exponent before exponentiation.
    """
    Y = np.atleast_2d(np.asarray(reduced, dtype=np.float64))
    if not np.all(np.isfinite(Y)):
        raise ValueError("non-finite coordinates in input")
    d2 = _sq_dists(Y, np.asarray(centroids))
    e = -tau * d2
    e -= e.max(axis=1, keepdims=True)
    p = np.exp(e)
    p /= p.sum(axis=1, keepdims=True)
    return p


def soft_assign(model: AspectModel, emb_rows: np.ndarray) -> np.ndarray:
    """Project embedding row(s) through the PCA and soft-assign to aspects.

    A single d-vector yields a K-vector; a matrix yields one row per input.
    """
    rows = np.asarray(emb_rows, dtype=np.float64)
    single = rows.ndim == 1
    if not np.all(np.isfinite(rows)):
        raise ValueError("non-finite embedding entries")
    phi = assign_from_reduced(model.centroids, model.tau, model.pca.project(rows))
    return phi[0] if single else phi


def save_model(model: AspectModel, path: str | Path) -> None:
    doc = {
        "pca_mean": model.pca.mean.tolist(),
        "pca_basis": model.pca.basis.tolist(),
        "explained_variance": model.pca.explained_variance.tolist(),
        "centroids": model.centroids.tolist(),
        "tau": model.tau,
        "k": model.k,
        "m": model.m,
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path: str | Path) -> AspectModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    pca = Pca(
        mean=np.asarray(doc["pca_mean"], dtype=np.float64),
        basis=np.asarray(doc["pca_basis"], dtype=np.float64),
        explained_variance=np.asarray(doc["explained_variance"], dtype=np.float64),
    )
    gram = pca.basis @ pca.basis.T
    if not np.allclose(gram, np.eye(pca.m), atol=1e-6):
        raise ValueError("pca_basis rows are not orthonormal")
    return AspectModel(pca=pca, centroids=np.asarray(doc["centroids"]), tau=float(doc["tau"]))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KSelectionRow:
    k: int
    silhouette: float
    calinski_harabasz: float
    davies_bouldin: float
    inertia: float


@dataclass(frozen=True)
class UserProfileDiagnostic:
    user_id: str
    w_hat_empirical: np.ndarray
    normalized_entropy: float


def normalized_entropy(w: np.ndarray) -> float:
    """Entropy of a simplex vector scaled to [0, 1], with 0*log(0) = 0."""
    w = np.asarray(w, dtype=np.float64)
    nz = w[w > 0]
    h = -float(np.sum(nz * np.log(nz)))
    return h / np.log(len(w)) if len(w) > 1 else 0.0


def k_selection_report(
    reduced: np.ndarray,
    candidate_ks: list[int],
    n_init: int = 10,
    seed: int = 0,
) -> list[KSelectionRow]:
    """Internal clustering quality indices per candidate K (human picks K)."""
    X = np.asarray(reduced, dtype=np.float64)
    rows = []
    for k in candidate_ks:
        res = fit_kmeans(X, k, n_init=n_init, seed=seed)
        rows.append(
            KSelectionRow(
                k=k,
                silhouette=float(silhouette_score(X, res.labels)),
                calinski_harabasz=float(calinski_harabasz_score(X, res.labels)),
                davies_bouldin=float(davies_bouldin_score(X, res.labels)),
                inertia=res.inertia,
            )
        )
    return rows


def user_profiles(phi: np.ndarray, user_ids: list[str]) -> list[UserProfileDiagnostic]:
    """Per-user empirical profile: mean of the user's sentence aspect vectors."""
    phi = np.asarray(phi, dtype=np.float64)
    if len(user_ids) != phi.shape[0]:
        raise ValueError("one user id per phi row required")
    by_user: dict[str, list[int]] = {}
    for i, uid in enumerate(user_ids):
        by_user.setdefault(uid, []).append(i)
    out = []
    for uid in sorted(by_user):
        w = phi[by_user[uid]].mean(axis=0)
        out.append(UserProfileDiagnostic(uid, w, normalized_entropy(w)))
    return out


def aspect_mass(phi: np.ndarray) -> np.ndarray:
    """Corpus-level share of each aspect's total soft-assignment mass."""
    phi = np.asarray(phi, dtype=np.float64)
    mass = phi.sum(axis=0)
    return mass / mass.sum()


# ---------------------------------------------------------------------------
# end-to-end discovery
# ---------------------------------------------------------------------------

GAP_SAMPLE_CAP = 100_000


def discover_aspects(
    emb: EmbeddingMatrix,
    k: int,
    m: int | None = None,
    variance_target: float | None = None,
    r: float = 10.0,
    n_init: int = 10,
    seed: int = 0,
) -> tuple[AspectModel, np.ndarray]:
    """Fit the full aspect model and return it with the reduced matrix."""
    if not emb.normalized:
        emb = normalize_rows(emb)
    pca = fit_pca(emb, m=m, variance_target=variance_target)
    reduced = pca.project(emb.data)
    km = fit_kmeans(reduced, k, n_init=n_init, seed=seed)
    if reduced.shape[0] > GAP_SAMPLE_CAP:
        rng = np.random.default_rng(seed)
        idx = rng.choice(reduced.shape[0], size=GAP_SAMPLE_CAP, replace=False)
        sample = reduced[np.sort(idx)]
    else:
        sample = reduced
    tau = calibrate_tau(sample, km.centroids, r=r)
    return AspectModel(pca=pca, centroids=km.centroids, tau=tau), reduced
