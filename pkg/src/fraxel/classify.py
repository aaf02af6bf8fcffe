"""Linear SVM classification, stratified cross-validation, and metrics.

The classifier is a one-vs-one linear soft-margin SVM trained by dual
coordinate descent, written here so training is deterministic: fixed
sample order, no randomized permutations, ties broken by lowest class
index. Features are standardized inside the model with statistics from
its own training data only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ParameterError
from .fusion import (
    FeatureMatrix,
    apply_projection,
    fit_pca_projection,
    fit_scatter_projection,
)

DEFAULT_C = 1.0
DEFAULT_FOLDS = 10
_DUAL_TOL = 1e-6
_MAX_EPOCHS = 10_000

TRANSFORMS = ("scatter", "pca", "none")


@njit(cache=True, nogil=True)
def _dual_cd(x, y, c, tol, max_epochs):
    # Soft-margin linear SVM dual, solved by cyclic coordinate descent:
    #   min_a 1/2 ||sum_i a_i y_i x_i||^2 - sum_i a_i,  0 <= a_i <= C.
    # x already carries the bias as a trailing constant-1 feature.
    # Stops when the relative primal-dual gap drops under tol.
    m, n = x.shape
    alpha = np.zeros(m)
    w = np.zeros(n)
    qd = np.empty(m)
    for i in range(m):
        s = 0.0
        for t in range(n):
            s += x[i, t] * x[i, t]
        qd[i] = s
    for _ in range(max_epochs):
        for i in range(m):
            if qd[i] <= 0.0:
                continue
            g = 0.0
            for t in range(n):
                g += w[t] * x[i, t]
            g = g * y[i] - 1.0
            a_old = alpha[i]
            a_new = a_old - g / qd[i]
            if a_new < 0.0:
                a_new = 0.0
            elif a_new > c:
                a_new = c
            if a_new != a_old:
                step = (a_new - a_old) * y[i]
                for t in range(n):
                    w[t] += step * x[i, t]
                alpha[i] = a_new
        wsq = 0.0
        for t in range(n):
            wsq += w[t] * w[t]
        hinge = 0.0
        asum = 0.0
        for i in range(m):
            dot = 0.0
            for t in range(n):
                dot += w[t] * x[i, t]
            slack = 1.0 - y[i] * dot
            if slack > 0.0:
                hinge += slack
            asum += alpha[i]
        primal = 0.5 * wsq + c * hinge
        dual = asum - 0.5 * wsq
        if primal - dual <= tol * (1.0 + abs(primal)):
            break
    return w


@dataclass(frozen=True)
class SvmModel:
    """One-vs-one linear classifiers plus the standardization they expect.

    weights[p] is the (n + 1)-vector (weights, bias) for class pair
    pairs[p] = (i, j), trained +1 for class i and -1 for class j; mean
    and scale standardize features first, zero-variance features
    passing through unscaled (scale 1).
    """

    class_names: tuple[str, ...]
    pairs: tuple[tuple[int, int], ...]
    weights: np.ndarray
    c: float
    mean: np.ndarray
    scale: np.ndarray


def train_svm(train: FeatureMatrix, c: float = DEFAULT_C) -> SvmModel:
    """Train one linear SVM per class pair by dual coordinate descent.

    Deterministic: samples are visited in their given order and classes
    in sorted-name order. Each pair's dual is solved to relative
    duality gap 1e-6 or 10^4 epochs, whichever comes first.
    """
    if not c > 0.0:
        raise ParameterError("C must be positive")
    class_names = tuple(sorted(set(train.labels)))
    if len(class_names) < 2:
        raise ParameterError("need at least two classes to train")
    index = {name: t for t, name in enumerate(class_names)}
    y_all = np.array([index[lab] for lab in train.labels], dtype=np.int64)

    mean = train.rows.mean(axis=0)
    std = train.rows.std(axis=0)
    scale = np.where(std == 0.0, 1.0, std)
    x = (train.rows - mean) / scale
    x = np.hstack((x, np.ones((x.shape[0], 1))))

    pairs = []
    weights = []
    for i in range(len(class_names)):
        for j in range(i + 1, len(class_names)):
            idx = np.flatnonzero((y_all == i) | (y_all == j))
            y = np.where(y_all[idx] == i, 1.0, -1.0)
            w = _dual_cd(
                np.ascontiguousarray(x[idx]), y, c, _DUAL_TOL, _MAX_EPOCHS
            )
            pairs.append((i, j))
            weights.append(w)
    return SvmModel(
        class_names=class_names,
        pairs=tuple(pairs),
        weights=np.array(weights),
        c=float(c),
        mean=mean,
        scale=scale,
    )


def predict(model: SvmModel, rows: np.ndarray) -> list[str]:
    """Majority vote over the pairwise classifiers; vote ties go to the
    lowest class index, and a zero pairwise decision votes likewise."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.mean.shape[0]:
        raise ParameterError("rows do not match the model's feature count")
    x = (rows - model.mean) / model.scale
    x = np.hstack((x, np.ones((x.shape[0], 1))))
    votes = np.zeros((x.shape[0], len(model.class_names)), dtype=np.int64)
    for (i, j), w in zip(model.pairs, model.weights):
        d = x @ w
        votes[d >= 0.0, i] += 1
        votes[d < 0.0, j] += 1
    winners = np.argmax(votes, axis=1)
    return [model.class_names[t] for t in winners]


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[t, p] = samples of true class t predicted as class p."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ParameterError("confusion counts must be square")
        if counts.min() < 0:
            raise ParameterError("confusion counts must be non-negative")
        if len(self.class_names) != counts.shape[0]:
            raise ParameterError("class_names must match the matrix size")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(
            self, "class_names", tuple(str(x) for x in self.class_names)
        )


def metrics_from_confusion(
    cm: ConfusionMatrix,
) -> tuple[float, float, float, float]:
    """Correctness rate (percent), Cohen's kappa, and the two macro
    error rates (AE1 over true classes, AE2 over predicted classes).

    AE1 averages the per-class false-negative rate 1 - diag/row. AE2
    averages the per-class rate of wrong predictions among predictions,
    (col - diag)/col, counting classes never predicted as 0.
    """
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise ParameterError("confusion matrix is empty")
    rows = counts.sum(axis=1)
    if np.any(rows == 0):
        raise ParameterError("every true class needs at least one sample")
    cols = counts.sum(axis=0)
    diag = np.diag(counts)

    p_o = diag.sum() / total
    cr = 100.0 * p_o
    p_e = float(rows @ cols) / (total * total)
    if p_e == 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    ae1 = float(np.mean(1.0 - diag / rows))
    fdr = np.divide(
        cols - diag, cols, out=np.zeros_like(cols), where=cols > 0
    )
    ae2 = float(np.mean(fdr))
    return cr, float(kappa), ae1, ae2


@dataclass(frozen=True)
class EvalReport:
    """One evaluation: descriptor count, the four metrics, the matrix."""

    nd: int
    cr: float
    kappa: float
    ae1: float
    ae2: float
    confusion: ConfusionMatrix


def fold_assignments(
    labels, folds: int, seed: int, groups=None
) -> np.ndarray:
    """Stratified fold ids, one per sample.

    Samples of each class (classes visited in sorted order, one shared
    seeded generator) are shuffled and dealt round-robin, so per-class
    fold sizes differ by at most one. With `groups`, whole groups are
    dealt instead and every member inherits its group's fold; a group
    may not span classes.
    """
    labels = np.asarray([str(x) for x in labels])
    if folds < 2:
        raise ParameterError("folds must be at least 2")
    rng = np.random.default_rng(seed)
    out = np.full(labels.shape[0], -1, dtype=np.int64)
    if groups is None:
        for cls in sorted(set(labels)):
            idx = np.flatnonzero(labels == cls)
            if idx.size < folds:
                raise ParameterError(
                    f"class {cls!r} has {idx.size} samples; "
                    f"needs at least {folds}"
                )
            perm = rng.permutation(idx.size)
            for t in range(idx.size):
                out[idx[perm[t]]] = t % folds
        return out

    groups = np.asarray([str(x) for x in groups])
    if groups.shape[0] != labels.shape[0]:
        raise ParameterError("groups must align with labels")
    group_class: dict[str, str] = {}
    for g, lab in zip(groups, labels):
        if group_class.setdefault(g, lab) != lab:
            raise ParameterError(f"group {g!r} spans multiple classes")
    for cls in sorted(set(labels)):
        cls_groups = sorted(g for g, lab in group_class.items() if lab == cls)
        if len(cls_groups) < folds:
            raise ParameterError(
                f"class {cls!r} has {len(cls_groups)} groups; "
                f"needs at least {folds}"
            )
        perm = rng.permutation(len(cls_groups))
        fold_of = {cls_groups[perm[t]]: t % folds for t in range(len(cls_groups))}
        for g, f in fold_of.items():
            out[groups == g] = f
    return out


def cross_validate(
    m: FeatureMatrix,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    c: float = DEFAULT_C,
    transform: str = "scatter",
    components: int = 10,
    ridge: float | None = None,
    groups=None,
    return_predictions: bool = False,
):
    """Stratified k-fold evaluation with leakage-free preprocessing.

    Each fold is held out once; the projection (scatter discriminant,
    PCA, or none) and the SVM's standardization are fitted on the
    training folds only and applied to the held-out fold. Returns an
    EvalReport; with return_predictions=True, returns (report,
    predicted labels aligned with m's rows).
    """
    if transform not in TRANSFORMS:
        raise ParameterError(f"transform must be one of {TRANSFORMS}")
    class_names = tuple(sorted(set(m.labels)))
    if len(class_names) < 2:
        raise ParameterError("need at least two classes")
    index = {name: t for t, name in enumerate(class_names)}
    assign = fold_assignments(m.labels, folds, seed, groups)

    k = len(class_names)
    counts = np.zeros((k, k), dtype=np.int64)
    predictions: list[str | None] = [None] * len(m.labels)
    labels_arr = np.asarray(m.labels)
    ids_arr = np.asarray(m.ids)
    for f in range(folds):
        train_idx = np.flatnonzero(assign != f)
        test_idx = np.flatnonzero(assign == f)
        if test_idx.size == 0:
            continue
        train_fm = FeatureMatrix(
            rows=m.rows[train_idx],
            labels=tuple(labels_arr[train_idx]),
            ids=tuple(ids_arr[train_idx]),
        )
        if transform == "scatter":
            w = fit_scatter_projection(train_fm, components, ridge)
        elif transform == "pca":
            w = fit_pca_projection(train_fm, components)
        else:
            w = None
        train_proj = apply_projection(train_fm, w) if w is not None else train_fm
        model = train_svm(train_proj, c)
        test_rows = m.rows[test_idx] @ w if w is not None else m.rows[test_idx]
        for pos, pred in zip(test_idx, predict(model, test_rows)):
            predictions[pos] = pred
            counts[index[labels_arr[pos]], index[pred]] += 1

    cm = ConfusionMatrix(counts=counts, class_names=class_names)
    cr, kappa, ae1, ae2 = metrics_from_confusion(cm)
    nd = components if transform != "none" else m.rows.shape[1]
    report = EvalReport(
        nd=nd, cr=cr, kappa=kappa, ae1=ae1, ae2=ae2, confusion=cm
    )
    if return_predictions:
        return report, predictions
    return report


def format_report_table(rows: list[tuple[str, EvalReport]]) -> str:
    """Plain-text table with columns Method, ND, CR, kappa, AE1, AE2."""
    name_w = max([len("Method")] + [len(name) for name, _ in rows])
    lines = [
        f"{'Method':<{name_w}}  {'ND':>4}  {'CR':>6}  {'kappa':>6}  "
        f"{'AE1':>5}  {'AE2':>5}"
    ]
    for name, rep in rows:
        lines.append(
            f"{name:<{name_w}}  {rep.nd:>4d}  {rep.cr:>6.2f}  "
            f"{rep.kappa:>6.4f}  {rep.ae1:>5.3f}  {rep.ae2:>5.3f}"
        )
    return "\n".join(lines)
