"""Feature fusion and the class-scatter discriminant projection.

Descriptor families are concatenated horizontally into one matrix, then
projected onto the directions that maximize inter-class over intra-class
scatter: the top eigenvectors of (S_intra + lambda*I)^(-1) S_inter. A
small ridge keeps the problem well-posed when features outnumber
samples per class. A plain PCA projection is provided as a fallback for
ablation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, ParameterError


@dataclass(frozen=True)
class FeatureMatrix:
    """m samples by n features, with per-sample labels and identifiers."""

    rows: np.ndarray
    labels: tuple[str, ...]
    ids: tuple[str, ...]

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ParameterError("rows must be a 2-d array")
        if not np.all(np.isfinite(rows)):
            raise ParameterError("feature rows must be finite")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "ids", tuple(str(x) for x in self.ids))
        if len(self.labels) != rows.shape[0] or len(self.ids) != rows.shape[0]:
            raise ParameterError("labels and ids must match the row count")


@dataclass(frozen=True)
class ScatterPair:
    """Within-class and between-class scatter matrices, both n x n."""

    s_intra: np.ndarray
    s_inter: np.ndarray


def concat_features(a: FeatureMatrix, b: FeatureMatrix) -> FeatureMatrix:
    """Join two descriptor families sample-wise: row i of the result is
    a's row i followed by b's row i.

    Both matrices must describe the same samples in the same order;
    disagreement on ids or labels raises AlignmentError.
    """
    if a.ids != b.ids:
        raise AlignmentError("feature matrices describe different samples")
    if a.labels != b.labels:
        raise AlignmentError("feature matrices disagree on labels")
    return FeatureMatrix(
        rows=np.hstack((a.rows, b.rows)), labels=a.labels, ids=a.ids
    )


def _class_indices(labels: tuple[str, ...]) -> dict[str, np.ndarray]:
    order = sorted(set(labels))
    arr = np.array(labels)
    return {c: np.flatnonzero(arr == c) for c in order}


def scatter_matrices(m: FeatureMatrix) -> ScatterPair:
    """Within-class scatter S_intra = sum_i sum_{x in C_i} (x - c_i)(x - c_i)^T
    and between-class scatter S_inter = sum_i N_i (c_i - g)(c_i - g)^T,
    where c_i are class means and g the global mean.

    Requires at least two classes and at least two samples per class.
    """
    by_class = _class_indices(m.labels)
    if len(by_class) < 2:
        raise ParameterError("need at least two classes")
    for c, idx in by_class.items():
        if idx.size < 2:
            raise ParameterError(f"class {c!r} has fewer than two samples")
    n = m.rows.shape[1]
    global_mean = m.rows.mean(axis=0)
    s_intra = np.zeros((n, n), dtype=np.float64)
    s_inter = np.zeros((n, n), dtype=np.float64)
    for idx in by_class.values():
        block = m.rows[idx]
        mean = block.mean(axis=0)
        centered = block - mean
        s_intra += centered.T @ centered
        d = mean - global_mean
        s_inter += idx.size * np.outer(d, d)
    # dgemm output is not guaranteed bit-symmetric
    s_intra = (s_intra + s_intra.T) / 2.0
    s_inter = (s_inter + s_inter.T) / 2.0
    return ScatterPair(s_intra=s_intra, s_inter=s_inter)


def _fix_signs(w: np.ndarray) -> np.ndarray:
    for col in range(w.shape[1]):
        peak = np.argmax(np.abs(w[:, col]))
        if w[peak, col] < 0.0:
            w[:, col] = -w[:, col]
    return w


def _whitening_factor(s_intra: np.ndarray, ridge: float) -> np.ndarray:
    n = s_intra.shape[0]
    vals, vecs = np.linalg.eigh(s_intra + ridge * np.eye(n))
    top = max(float(vals.max()), 0.0)
    floor = top * 1e-12 if top > 0.0 else 1.0
    vals = np.maximum(vals, floor)
    return (vecs / np.sqrt(vals)) @ vecs.T


def _auto_ridge(s_intra: np.ndarray) -> float:
    return 1e-6 * float(np.trace(s_intra)) / s_intra.shape[0]


def scatter_spectrum(m: FeatureMatrix, ridge: float | None = None) -> np.ndarray:
    """Descending eigenvalues of (S_intra + ridge*I)^(-1) S_inter.

    Each eigenvalue is the inter/intra scatter ratio along one
    discriminant direction; the default ridge is 1e-6 * trace/n.
    """
    pair = scatter_matrices(m)
    lam = _auto_ridge(pair.s_intra) if ridge is None else float(ridge)
    inv_half = _whitening_factor(pair.s_intra, lam)
    b = inv_half @ pair.s_inter @ inv_half
    vals = np.linalg.eigvalsh((b + b.T) / 2.0)
    return vals[np.argsort(-vals, kind="stable")]


def fit_scatter_projection(
    m: FeatureMatrix, k: int, ridge: float | None = None
) -> np.ndarray:
    """Learn the n x k discriminant projection from labeled data.

    Solved in symmetric form: whiten by the ridge-regularized S_intra,
    eigendecompose the whitened S_inter, keep the k leading directions
    (descending eigenvalue, ties broken by original order, always
    exactly k columns), and fix each column's sign so its largest-
    magnitude entry is positive.
    """
    n = m.rows.shape[1]
    if not 1 <= k <= n:
        raise ParameterError(f"k must lie in [1, {n}]")
    pair = scatter_matrices(m)
    lam = _auto_ridge(pair.s_intra) if ridge is None else float(ridge)
    inv_half = _whitening_factor(pair.s_intra, lam)
    b = inv_half @ pair.s_inter @ inv_half
    vals, vecs = np.linalg.eigh((b + b.T) / 2.0)
    order = np.argsort(-vals, kind="stable")
    w = inv_half @ vecs[:, order[:k]]
    return _fix_signs(w)


def fit_pca_projection(m: FeatureMatrix, k: int) -> np.ndarray:
    """Unsupervised fallback: top-k principal axes of the centered data."""
    n = m.rows.shape[1]
    if not 1 <= k <= n:
        raise ParameterError(f"k must lie in [1, {n}]")
    centered = m.rows - m.rows.mean(axis=0)
    cov = centered.T @ centered
    vals, vecs = np.linalg.eigh((cov + cov.T) / 2.0)
    order = np.argsort(-vals, kind="stable")
    return _fix_signs(vecs[:, order[:k]].copy())


def apply_projection(m: FeatureMatrix, w: np.ndarray) -> FeatureMatrix:
    if w.ndim != 2 or w.shape[0] != m.rows.shape[1]:
        raise ParameterError("projection shape does not match feature count")
    return FeatureMatrix(rows=m.rows @ w, labels=m.labels, ids=m.ids)


def discriminant_transform(
    m: FeatureMatrix, k: int, ridge: float | None = None
) -> FeatureMatrix:
    """Project onto the k leading discriminant directions of m itself."""
    return apply_projection(m, fit_scatter_projection(m, k, ridge))


def pca_transform(m: FeatureMatrix, k: int) -> FeatureMatrix:
    return apply_projection(m, fit_pca_projection(m, k))
