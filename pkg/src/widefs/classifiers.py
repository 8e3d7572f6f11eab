"""Seven trainable classifier kinds with posterior-probability output.

All models are implemented natively at desk scale and are deterministic
given (training data, hyperparameters, seed); training data is reordered
canonically first so row permutations cannot change the result.  Posterior
conventions per kind:

  NN1   softmax over negated per-class nearest distances
  DT    class distribution of the training rows in the reached leaf
  LDC   Bayes rule on Gaussians with a shared (ridge-regularized) covariance
  NB    Gaussian naive Bayes with per-class variance floors
  RF    average of the trees' leaf distributions
  SVMG/SVML  discrete {0, 1} by decision side (no calibration)

An empty feature subset is legal for every kind and yields a prior-only
model that predicts the training class frequencies everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .utils import canonical_order, entropy_bits

CLASSIFIER_TAGS = ("NN1", "DT", "LDC", "NB", "RF", "SVMG", "SVML")

_DEFAULT_HYPERPARAMS = {
    "NN1": {},
    "DT": {"min_split": 2},
    "LDC": {"ridge": 1e-3},
    "NB": {"var_floor_scale": 1e-9},
    "RF": {"n_trees": 100},
    "SVMG": {"c": 1.0, "tol": 1e-3},
    "SVML": {"c": 1.0, "tol": 1e-3},
}


@dataclass(frozen=True)
class ClassifierKind:
    tag: str
    hyperparams: tuple = ()

    def param(self, key):
        return dict(self.hyperparams)[key]


def classifier_kind(tag: str, **overrides) -> ClassifierKind:
    """Build a ClassifierKind with defaults, validating tag and override keys."""
    if tag not in CLASSIFIER_TAGS:
        raise ValueError(f"unknown classifier tag {tag!r}; expected one of {CLASSIFIER_TAGS}")
    params = dict(_DEFAULT_HYPERPARAMS[tag])
    for key, value in overrides.items():
        if key not in params:
            raise ValueError(f"unknown hyperparameter {key!r} for {tag}")
        params[key] = type(params[key])(value)
    return ClassifierKind(tag=tag, hyperparams=tuple(sorted(params.items())))


def _coerce_kind(kind) -> ClassifierKind:
    if isinstance(kind, ClassifierKind):
        return kind
    return classifier_kind(str(kind))


@dataclass
class TrainedModel:
    """A fitted classifier restricted to one feature subset.

    ``classes`` holds the label indices seen in training (ascending);
    posteriors align with it.  ``class_names`` carries the matching names
    when the model was trained through :func:`train`.
    """

    kind: ClassifierKind
    classes: np.ndarray
    n_features: int
    priors: np.ndarray
    state: object
    class_names: tuple[str, ...] | None = None


# ---------------------------------------------------------------------------
# decision trees (used directly and inside the forest)
# ---------------------------------------------------------------------------

_entropy = entropy_bits


@dataclass
class _TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "_TreeNode | None" = None
    right: "_TreeNode | None" = None
    dist: np.ndarray | None = None


def _best_split(X, y, n_classes, candidates):
    """Best (gain, feature, threshold) over candidate features; None if no gain.

    Vectorized over candidates: one argsort per node.  Ties on gain fall
    to the lower feature index, then the lower threshold.
    """
    if len(y) <= _SMALL_N:
        return _best_split_small(X, y, n_classes, candidates)
    cand = np.asarray(list(candidates), dtype=np.intp)
    n = len(y)
    cols = X[:, cand]
    order = np.argsort(cols, axis=0, kind="stable")
    xs = np.take_along_axis(cols, order, axis=0)
    ys = y[order]  # (n, c)
    onehot = np.zeros((n, len(cand), n_classes))
    np.put_along_axis(onehot, ys[:, :, None], 1.0, axis=2)
    cum = np.cumsum(onehot, axis=0)
    parent_h = float(_entropy(cum[-1, 0]))
    splittable = xs[:-1] < xs[1:]  # (n-1, c)
    if not splittable.any():
        return None
    left = cum[:-1]
    right = cum[-1][None, :, :] - left
    nl = np.arange(1, n, dtype=float)[:, None]
    gain = parent_h - (nl * _entropy(left) + (n - nl) * _entropy(right)) / n
    gain = np.where(splittable, gain, -np.inf)
    thresholds = 0.5 * (xs[:-1] + xs[1:])
    pos, col = np.unravel_index(
        np.lexsort((thresholds.ravel(), np.broadcast_to(cand, gain.shape).ravel(), -gain.ravel()))[0],
        gain.shape,
    )
    g = float(gain[pos, col])
    if g <= 1e-12:
        return None
    return g, int(cand[col]), float(thresholds[pos, col])


def _entropy_scalar(counts, total):
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log(p)
    return h / math.log(2.0)


def _best_split_small(X, y, n_classes, candidates):
    """Plain-Python twin of :func:`_best_split` for tiny nodes."""
    n = len(y)
    ys = [int(v) for v in y]
    parent = [0] * n_classes
    for t in ys:
        parent[t] += 1
    parent_h = _entropy_scalar(parent, n)
    best_key = None
    best = None
    for j in candidates:
        col = X[:, j].tolist()
        order = sorted(range(n), key=lambda t: (col[t], t))
        left = [0] * n_classes
        for pos in range(n - 1):
            left[ys[order[pos]]] += 1
            lo_v, hi_v = col[order[pos]], col[order[pos + 1]]
            if lo_v >= hi_v:
                continue
            nl = pos + 1
            nr = n - nl
            right = [p - q for p, q in zip(parent, left)]
            gain = parent_h - (nl * _entropy_scalar(left, nl) + nr * _entropy_scalar(right, nr)) / n
            thr = 0.5 * (lo_v + hi_v)
            key = (-gain, int(j), thr)
            if best_key is None or key < best_key:
                best_key = key
                best = (gain, int(j), thr)
    if best is None or best[0] <= 1e-12:
        return None
    return best


def _draw_candidates(rng, k, size):
    """Sorted uniform sample of ``size`` feature indices without replacement."""
    picked = []
    pool = list(range(k))
    for i in range(size):
        j = i + int(rng.integers(k - i))
        pool[i], pool[j] = pool[j], pool[i]
        picked.append(pool[i])
    picked.sort()
    return picked


def _grow_tree(X, y, n_classes, rng=None, n_candidates=None, min_split=2, importances=None):
    counts = np.bincount(y, minlength=n_classes).astype(float)
    node = _TreeNode(dist=counts / counts.sum())
    if len(y) < min_split or np.count_nonzero(counts) <= 1:
        return node
    if n_candidates is None or n_candidates >= X.shape[1]:
        candidates = range(X.shape[1])
    else:
        candidates = _draw_candidates(rng, X.shape[1], n_candidates)
    split = _best_split(X, y, n_classes, candidates)
    if split is None:
        return node
    gain, j, thr = split
    if importances is not None:
        importances[j] += gain * len(y)
    mask = X[:, j] <= thr
    node.feature = j
    node.threshold = thr
    node.dist = None
    node.left = _grow_tree(X[mask], y[mask], n_classes, rng, n_candidates, min_split, importances)
    node.right = _grow_tree(X[~mask], y[~mask], n_classes, rng, n_candidates, min_split, importances)
    return node


def _tree_proba(node: _TreeNode, x: np.ndarray) -> np.ndarray:
    while node.dist is None:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node.dist


# ---------------------------------------------------------------------------
# SMO solver for the SVMs
# ---------------------------------------------------------------------------

_SMALL_N = 32


def _smo_solve(K: np.ndarray, y: np.ndarray, c: float, tol: float):
    """Sequential minimal optimization on a precomputed kernel; y in {-1,+1}.

    Works on the maximal violating pair each iteration (deterministic:
    argmax/argmin take the lowest index on ties) and stops once the KKT
    duality gap drops below ``tol``.  Returns (alphas, bias).
    """
    if len(y) <= _SMALL_N:
        return _smo_solve_small(K.tolist(), y.tolist(), c, tol)
    n = len(y)
    alphas = np.zeros(n)
    f = np.zeros(n)  # f_t = sum_j alpha_j y_j K_tj
    for _ in range(200 * n + 200):
        viol = y - f
        up = (y > 0) & (alphas < c) | (y < 0) & (alphas > 0)
        low = (y < 0) & (alphas < c) | (y > 0) & (alphas > 0)
        if not up.any() or not low.any():
            break
        i = int(np.argmax(np.where(up, viol, -np.inf)))
        j = int(np.argmin(np.where(low, viol, np.inf)))
        if viol[i] - viol[j] <= tol:
            break
        if y[i] != y[j]:
            lo = max(0.0, alphas[j] - alphas[i])
            hi = min(c, c + alphas[j] - alphas[i])
        else:
            lo = max(0.0, alphas[i] + alphas[j] - c)
            hi = min(c, alphas[i] + alphas[j])
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        ei, ej = f[i] - y[i], f[j] - y[j]
        if eta < -1e-12:
            aj = alphas[j] - y[j] * (ei - ej) / eta
        else:
            # flat direction (e.g. duplicate points): jump to the better bound
            aj = hi if y[j] * (ei - ej) > 0 else lo
        aj = min(hi, max(lo, aj))
        if abs(aj - alphas[j]) < 1e-12:
            break
        ai = alphas[i] + y[i] * y[j] * (alphas[j] - aj)
        f += (ai - alphas[i]) * y[i] * K[:, i] + (aj - alphas[j]) * y[j] * K[:, j]
        alphas[i], alphas[j] = ai, aj
    viol = y - f
    up = (y > 0) & (alphas < c) | (y < 0) & (alphas > 0)
    low = (y < 0) & (alphas < c) | (y > 0) & (alphas > 0)
    hi_v = np.max(np.where(up, viol, -np.inf)) if up.any() else 0.0
    lo_v = np.min(np.where(low, viol, np.inf)) if low.any() else 0.0
    if not math.isfinite(hi_v):
        hi_v = lo_v if math.isfinite(lo_v) else 0.0
    if not math.isfinite(lo_v):
        lo_v = hi_v
    b = 0.5 * (hi_v + lo_v)
    return alphas, b


def _smo_solve_small(K, y, c, tol):
    """Plain-Python twin of :func:`_smo_solve` for tiny problems, where the
    per-op overhead of array code dominates.  Same selection and update
    rules, so results agree up to float round-off."""
    n = len(y)
    alphas = [0.0] * n
    f = [0.0] * n
    for _ in range(200 * n + 200):
        up_v, i = -math.inf, -1
        low_v, j = math.inf, -1
        for t in range(n):
            v = y[t] - f[t]
            a = alphas[t]
            if (y[t] > 0 and a < c) or (y[t] < 0 and a > 0):
                if v > up_v:
                    up_v, i = v, t
            if (y[t] < 0 and a < c) or (y[t] > 0 and a > 0):
                if v < low_v:
                    low_v, j = v, t
        if i < 0 or j < 0 or up_v - low_v <= tol:
            break
        if y[i] != y[j]:
            lo = max(0.0, alphas[j] - alphas[i])
            hi = min(c, c + alphas[j] - alphas[i])
        else:
            lo = max(0.0, alphas[i] + alphas[j] - c)
            hi = min(c, alphas[i] + alphas[j])
        eta = 2.0 * K[i][j] - K[i][i] - K[j][j]
        ei, ej = f[i] - y[i], f[j] - y[j]
        if eta < -1e-12:
            aj = alphas[j] - y[j] * (ei - ej) / eta
        else:
            aj = hi if y[j] * (ei - ej) > 0 else lo
        aj = min(hi, max(lo, aj))
        if abs(aj - alphas[j]) < 1e-12:
            break
        ai = alphas[i] + y[i] * y[j] * (alphas[j] - aj)
        si = (ai - alphas[i]) * y[i]
        sj = (aj - alphas[j]) * y[j]
        ki, kj = K[i], K[j]
        for t in range(n):
            f[t] += si * ki[t] + sj * kj[t]
        alphas[i], alphas[j] = ai, aj
    up_v, low_v = -math.inf, math.inf
    for t in range(n):
        v = y[t] - f[t]
        a = alphas[t]
        if (y[t] > 0 and a < c) or (y[t] < 0 and a > 0):
            up_v = max(up_v, v)
        if (y[t] < 0 and a < c) or (y[t] > 0 and a > 0):
            low_v = min(low_v, v)
    if not math.isfinite(up_v):
        up_v = low_v if math.isfinite(low_v) else 0.0
    if not math.isfinite(low_v):
        low_v = up_v
    return np.asarray(alphas), 0.5 * (up_v + low_v)


def _rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def linear_svm_weights(X: np.ndarray, y_signs: np.ndarray, c: float = 1.0, tol: float = 1e-3):
    """Train a linear SVM by SMO; return (weight vector, bias)."""
    K = X @ X.T
    alphas, b = _smo_solve(K, y_signs, c, tol)
    return X.T @ (alphas * y_signs), b


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _fit(kind: ClassifierKind, X: np.ndarray, y: np.ndarray, seed: int, presorted: bool = False) -> TrainedModel:
    """Fit on a column-restricted matrix; y are integer label indices.

    ``presorted`` skips the canonical reordering when the caller already
    passes rows in canonical order (e.g. fold slices of a sorted probe).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if not presorted:
        order = canonical_order(X, y)
        X, y = X[order], y[order]
    classes = np.unique(y)
    y_local = np.searchsorted(classes, y)
    m = len(classes)
    counts = np.bincount(y_local, minlength=m).astype(float)
    priors = counts / counts.sum()
    model = TrainedModel(kind=kind, classes=classes, n_features=X.shape[1], priors=priors, state=None)
    if X.shape[1] == 0 or m == 1:
        model.state = ("prior",)
        return model

    tag = kind.tag
    params = dict(kind.hyperparams)
    if tag == "NN1":
        model.state = ("nn1", X, y_local)
    elif tag == "DT":
        root = _grow_tree(X, y_local, m, min_split=params["min_split"])
        model.state = ("dt", root)
    elif tag == "LDC":
        means = np.stack([X[y_local == k].mean(axis=0) for k in range(m)])
        centered = X - means[y_local]
        dof = max(1, len(y) - m)
        cov = (centered.T @ centered) / dof
        reg = params["ridge"] * np.trace(cov) / X.shape[1] + 1e-12
        prec = np.linalg.pinv(cov + reg * np.eye(X.shape[1]))
        model.state = ("ldc", means, prec, np.log(priors))
    elif tag == "NB":
        means = np.stack([X[y_local == k].mean(axis=0) for k in range(m)])
        variances = np.stack([X[y_local == k].var(axis=0) for k in range(m)])
        rng_span = X.max(axis=0) - X.min(axis=0)
        floor = np.where(rng_span > 0, params["var_floor_scale"] * rng_span**2, 1.0)
        variances = np.maximum(variances, floor)
        model.state = ("nb", means, variances, np.log(priors))
    elif tag == "RF":
        n_trees = params["n_trees"]
        n_candidates = max(1, math.ceil(math.sqrt(X.shape[1])))
        importances = np.zeros(X.shape[1])
        trees = []
        for t in range(n_trees):
            # one independent child stream per tree (same streams as
            # SeedSequence(seed).spawn(n_trees), built without the overhead)
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))
            )
            rows = rng.integers(0, len(y), size=len(y))
            tree_imp = np.zeros(X.shape[1])
            trees.append(
                _grow_tree(X[rows], y_local[rows], m, rng, n_candidates, importances=tree_imp)
            )
            importances += tree_imp / len(y)
        model.state = ("rf", trees, importances / n_trees)
    elif tag in ("SVML", "SVMG"):
        if m != 2:
            raise ValueError("SVM classifiers support exactly 2 classes")
        signs = np.where(y_local == 1, 1.0, -1.0)
        if tag == "SVML":
            K = X @ X.T
            gamma = None
        else:
            gamma = 1.0 / X.shape[1]
            K = _rbf_kernel(X, X, gamma)
        alphas, b = _smo_solve(K, signs, params["c"], params["tol"])
        sv = alphas > 0
        model.state = ("svm", X[sv], (alphas * signs)[sv], b, gamma)
    else:  # pragma: no cover - tags validated upstream
        raise ValueError(f"unknown classifier tag {tag!r}")
    return model


def train(kind, data: Dataset, subset=None, seed: int = 0) -> TrainedModel:
    """Train a classifier of ``kind`` on ``data`` restricted to ``subset``.

    ``subset`` is a FeatureSubset, an index sequence, or None for all
    features; an empty subset gives the prior-only model.
    """
    kind = _coerce_kind(kind)
    cols = _subset_columns(subset, data.n_features)
    X = data.features[:, cols] if len(cols) else np.empty((data.n_instances, 0))
    model = _fit(kind, X, data.label_indices, seed)
    model.class_names = tuple(data.class_names[k] for k in model.classes)
    return model


def _subset_columns(subset, n_features: int) -> np.ndarray:
    if subset is None:
        return np.arange(n_features, dtype=np.intp)
    indices = np.asarray(getattr(subset, "indices", subset), dtype=np.intp)
    if indices.size and (indices.min() < 0 or indices.max() >= n_features):
        raise ValueError("feature subset index out of range")
    return indices


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------

def predict_proba(model: TrainedModel, x) -> np.ndarray:
    """Posterior vector(s) over ``model.classes`` for one instance or a batch."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model.n_features:
        raise ValueError(
            f"instance has {X.shape[1]} features; model expects {model.n_features}"
        )
    probs = _proba_matrix(model, X)
    return probs[0] if single else probs


def _proba_matrix(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    state = model.state
    n = X.shape[0]
    m = len(model.classes)
    tag = state[0]
    if tag == "prior":
        return np.tile(model.priors, (n, 1))
    if tag == "nn1":
        _, Xt, yt = state
        sq = (
            np.sum(X * X, axis=1)[:, None]
            + np.sum(Xt * Xt, axis=1)[None, :]
            - 2.0 * (X @ Xt.T)
        )
        d = np.sqrt(np.maximum(sq, 0.0))
        dmin = np.full((n, m), np.inf)
        for k in range(m):
            dmin[:, k] = d[:, yt == k].min(axis=1)
        return _softmax(-dmin)
    if tag == "dt":
        return np.stack([_tree_proba(state[1], row) for row in X])
    if tag == "ldc":
        _, means, prec, log_priors = state
        pm = means @ prec
        scores = X @ pm.T - 0.5 * np.sum(pm * means, axis=1)[None, :] + log_priors[None, :]
        return _softmax(scores)
    if tag == "nb":
        _, means, variances, log_priors = state
        ll = -0.5 * (
            np.log(2.0 * math.pi * variances)[None, :, :]
            + (X[:, None, :] - means[None, :, :]) ** 2 / variances[None, :, :]
        ).sum(axis=2)
        return _softmax(ll + log_priors[None, :])
    if tag == "rf":
        _, trees, _ = state
        acc = np.zeros((n, m))
        for i in range(n):
            row = X[i]
            for tree in trees:
                acc[i] += _tree_proba(tree, row)
        return acc / len(trees)
    if tag == "svm":
        _, sv, coef, b, gamma = state
        if gamma is None:
            f = X @ (sv.T @ coef) + b if len(coef) else np.full(n, b)
        else:
            f = (_rbf_kernel(X, sv, gamma) @ coef + b) if len(coef) else np.full(n, b)
        probs = np.zeros((n, 2))
        positive = f > 0
        probs[positive, 1] = 1.0
        probs[~positive, 0] = 1.0
        return probs
    raise ValueError(f"unknown model state {tag!r}")  # pragma: no cover


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def predict_index(model: TrainedModel, x) -> np.ndarray | int:
    """Predicted label index (argmax posterior, ties toward lower class index)."""
    probs = predict_proba(model, x)
    if probs.ndim == 1:
        return int(model.classes[int(np.argmax(probs))])
    return model.classes[np.argmax(probs, axis=1)]


def predict_label(model: TrainedModel, x):
    """Predicted class identifier (name when available, else label index)."""
    idx = predict_index(model, x)
    if model.class_names is None:
        return idx
    lookup = {int(c): name for c, name in zip(model.classes, model.class_names)}
    if np.ndim(idx) == 0:
        return lookup[int(idx)]
    return np.array([lookup[int(i)] for i in idx], dtype=object)
