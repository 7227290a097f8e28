"""Severity-risk scoring: cluster incident texts, score checks by cosine.

Events are embedded as document vectors and clustered with Lloyd's
algorithm under k-means++ seeding. The cluster count can be chosen
automatically from the inertia curve (largest second difference). A check
scores as its best clamped cosine against any centroid, and throttling is
permitted only when that score is strictly below the threshold.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import CheckRecord, SeverityEvent
from .errors import ModelNotFittedError
from .textprep import TextPrepConfig, normalize
from .vectors import EmbeddingModel, cosine_similarity, doc_vector


@dataclass
class KMeansResult:
    centroids: np.ndarray          # (k, dim)
    assignments: np.ndarray        # (n,)
    inertia: float
    inertia_trace: list[float]     # one value per Lloyd iteration
    n_iter: int


def _sq_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, k) squared euclidean distances, clamped against tiny negatives
    d = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ centroids.T)
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    return np.maximum(d, 0.0)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = x[first]
    closest = _sq_distances(x, centroids[:1]).ravel()
    for i in range(1, k):
        total = float(closest.sum())
        if total == 0.0:
            # all remaining points coincide with chosen centroids
            centroids[i] = x[int(rng.integers(n))]
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r))
            idx = min(idx, n - 1)
            centroids[i] = x[idx]
        closest = np.minimum(closest, _sq_distances(x, centroids[i:i + 1]).ravel())
    return centroids


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int) -> KMeansResult:
    k = centroids.shape[0]
    assignments = None
    trace: list[float] = []
    for iteration in range(max_iter):
        d = _sq_distances(x, centroids)
        new_assignments = np.argmin(d, axis=1)

        # re-seed empty clusters to the point farthest from its centroid
        taken: set[int] = set()
        for c in range(k):
            if np.any(new_assignments == c):
                continue
            dist_to_own = d[np.arange(x.shape[0]), new_assignments].copy()
            for t in taken:
                dist_to_own[t] = -1.0
            far = int(np.argmax(dist_to_own))
            taken.add(far)
            centroids[c] = x[far]
            new_assignments[far] = c

        trace.append(float(np.sum(_sq_distances(x, centroids)[np.arange(x.shape[0]),
                                                              new_assignments])))
        if assignments is not None and np.array_equal(new_assignments, assignments):
            assignments = new_assignments
            break
        assignments = new_assignments
        for c in range(k):
            members = x[assignments == c]
            if members.shape[0]:
                centroids[c] = members.mean(axis=0)
    return KMeansResult(centroids=centroids, assignments=assignments,
                        inertia=trace[-1], inertia_trace=trace, n_iter=len(trace))


def kmeans(vectors, k: int, seed: int = 0, max_iter: int = 100,
           restarts: int = 1, init_centroids: np.ndarray | None = None) -> KMeansResult:
    """k-means++ seeded Lloyd iterations, deterministic for a fixed seed.

    With ``restarts`` > 1 the best of several seeded runs is returned.
    ``init_centroids`` forces one extra run from the given start (used for
    warm starts when sweeping k).
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("need a non-empty 2-d array of vectors")
    n_distinct = np.unique(x, axis=0).shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n_distinct:
        raise ValueError(f"k={k} exceeds the {n_distinct} distinct vectors")

    best: KMeansResult | None = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        result = _lloyd(x, _kmeans_pp_init(x, k, rng), max_iter)
        if best is None or result.inertia < best.inertia:
            best = result
    if init_centroids is not None:
        if init_centroids.shape != (k, x.shape[1]):
            raise ValueError("init_centroids has the wrong shape")
        result = _lloyd(x, init_centroids.copy(), max_iter)
        if result.inertia < best.inertia:
            best = result
    return best


@dataclass
class ElbowResult:
    chosen_k: int
    inertia_by_k: dict[int, float]
    results_by_k: dict[int, KMeansResult] = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "inertia"])
            for k in sorted(self.inertia_by_k):
                writer.writerow([k, repr(self.inertia_by_k[k])])


def choose_elbow(inertia_by_k: dict[int, float]) -> int:
    """k with the largest second difference of inertia; ties to the smallest k."""
    ks = sorted(inertia_by_k)
    if len(ks) < 3:
        raise ValueError("need at least 3 inertia points to locate an elbow")
    curvature: dict[int, float] = {}
    for i in range(1, len(ks) - 1):
        curvature[ks[i]] = (inertia_by_k[ks[i - 1]] - 2.0 * inertia_by_k[ks[i]]
                            + inertia_by_k[ks[i + 1]])
    return min(curvature, key=lambda k: (-curvature[k], k))


def elbow_select(vectors, k_range, seed: int = 0, restarts: int = 5,
                 max_iter: int = 100) -> ElbowResult:
    """Pick k at the largest second difference of the inertia curve.

    Each k is warm-started from the previous best solution (plus the
    farthest point as the new centroid) in addition to fresh restarts, so
    the inertia curve is non-increasing in k. Ties go to the smallest k.
    """
    ks = sorted(set(int(k) for k in k_range))
    if len(ks) < 3:
        raise ValueError("k_range must contain at least 3 distinct values")
    x = np.asarray(vectors, dtype=np.float64)

    results: dict[int, KMeansResult] = {}
    prev: KMeansResult | None = None
    for k in ks:
        warm = None
        if prev is not None and prev.centroids.shape[0] == k - 1:
            d = _sq_distances(x, prev.centroids).min(axis=1)
            warm = np.vstack([prev.centroids, x[int(np.argmax(d))]])
        results[k] = kmeans(x, k, seed=seed, max_iter=max_iter, restarts=restarts,
                            init_centroids=warm)
        prev = results[k]

    inertia_by_k = {k: results[k].inertia for k in ks}
    return ElbowResult(chosen_k=choose_elbow(inertia_by_k),
                       inertia_by_k=inertia_by_k, results_by_k=results)


# ---------------------------------------------------------------------------
# Severity model over incident texts
# ---------------------------------------------------------------------------

@dataclass
class SeverityScore:
    check_id: str
    score: float
    nearest_cluster: int


@dataclass
class SeverityModel:
    """Centroids over severity-event vectors plus the fit diagnostics.

    Vectors are centered by the mean event vector before clustering and
    scoring; without this, averaged embeddings crowd into a narrow cone
    and every check looks similar to every cluster.
    """

    k: int
    centroids: np.ndarray              # centered space
    center: np.ndarray                 # mean raw event vector
    assignments: dict[str, int]
    inertia_by_k: dict[int, float]
    embedding: EmbeddingModel
    prep: TextPrepConfig = field(default_factory=TextPrepConfig)

    def event_count(self) -> int:
        return len(self.assignments)


def fit_severity_model(events: list[SeverityEvent], embedding: EmbeddingModel,
                       k: int | None = None, k_range=None, seed: int = 0,
                       restarts: int = 5,
                       prep: TextPrepConfig | None = None) -> SeverityModel:
    """Embed events, cluster them, and keep the inertia curve for plotting."""
    if not events:
        raise ValueError("no severity events supplied")
    prep = prep or TextPrepConfig()
    raw = np.stack([
        doc_vector(normalize(e.description, prep, source_id=e.id), embedding)
        for e in events
    ])
    center = raw.mean(axis=0)
    vectors = raw - center
    inertia_by_k: dict[int, float] = {}
    if k is None:
        if k_range is None:
            hi = max(3, min(16, np.unique(vectors, axis=0).shape[0]))
            k_range = range(1, hi + 1)
        elbow = elbow_select(vectors, k_range, seed=seed, restarts=restarts)
        k = elbow.chosen_k
        inertia_by_k = dict(elbow.inertia_by_k)
        result = elbow.results_by_k[k]
    else:
        result = kmeans(vectors, k, seed=seed, restarts=restarts)
        inertia_by_k = {k: result.inertia}
    assignments = {e.id: int(c) for e, c in zip(events, result.assignments)}
    return SeverityModel(k=k, centroids=result.centroids, center=center,
                         assignments=assignments, inertia_by_k=inertia_by_k,
                         embedding=embedding, prep=prep)


def severity_score(check: CheckRecord, model: SeverityModel) -> SeverityScore:
    """Best clamped cosine between the check text and any centroid."""
    if model.centroids is None or model.centroids.shape[0] == 0:
        raise ModelNotFittedError("severity model has no centroids")
    v = doc_vector(normalize(check.text(), model.prep, source_id=check.id), model.embedding)
    if float(np.linalg.norm(v)) == 0.0:
        return SeverityScore(check_id=check.id, score=0.0, nearest_cluster=0)
    v = v - model.center
    scores = np.array([
        min(1.0, max(0.0, cosine_similarity(v, c))) for c in model.centroids
    ])
    best = int(np.argmax(scores))
    return SeverityScore(check_id=check.id, score=float(scores[best]), nearest_cluster=best)


def severity_gate(score: float, threshold: float) -> bool:
    """True when throttling is permitted: the score is strictly below t."""
    if not (0.0 <= score <= 1.0):
        raise ValueError(f"severity score {score} outside [0, 1]")
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    return score < threshold


def save_severity_model(model: SeverityModel, path) -> None:
    """Text export: JSON header, centroid rows, then event assignments."""
    from .vectors import embedding_to_dict
    payload = {
        "k": model.k,
        "centroids": [[float(v) for v in row] for row in model.centroids],
        "center": [float(v) for v in model.center],
        "assignments": model.assignments,
        "inertia_by_k": {str(k): float(v) for k, v in model.inertia_by_k.items()},
        "prep": {"stopwords": sorted(model.prep.stopwords),
                 "max_tokens": model.prep.max_tokens,
                 "typo_min_freq": model.prep.typo_min_freq},
        "embedding": embedding_to_dict(model.embedding),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_severity_model(path) -> SeverityModel:
    from .classifiers.features import prep_from_dict
    from .vectors import embedding_from_dict
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return SeverityModel(
        k=int(raw["k"]),
        centroids=np.array(raw["centroids"], dtype=np.float64),
        center=np.array(raw["center"], dtype=np.float64),
        assignments={k: int(v) for k, v in raw["assignments"].items()},
        inertia_by_k={int(k): float(v) for k, v in raw["inertia_by_k"].items()},
        embedding=embedding_from_dict(raw["embedding"]),
        prep=prep_from_dict(raw["prep"]),
    )
