"""Nuisance learners: a regression forest built from scratch, a conditional
density model for a continuous treatment, and kernel smoothing utilities.

The forest is a plain CART ensemble (variance-reduction splits, bootstrap
rows, feature subsampling per node). Trees are grown from per-tree seed
streams spawned off one seed, so fits are reproducible and independent of
any execution order.

The conditional density pi(a | x) is modelled as a location family: a forest
mean m(x) = E[A | X = x] plus a kernel density over out-of-bag residuals.
Out-of-bag (rather than in-sample) residuals keep the residual spread honest;
in-sample residuals of a deep forest are shrunk toward zero.
"""

from dataclasses import dataclass, field

import numpy as np


class DegenerateDensityError(ValueError):
    """Residuals are (numerically) constant: the treatment is a deterministic
    function of the covariates and no conditional density exists."""


class OutOfSupportError(ValueError):
    """A compact kernel has no training mass at the query point."""


# ---------------------------------------------------------------------------
# Regression trees and forests

_LEAF = -1


@dataclass
class _Tree:
    feature: np.ndarray     # split feature per node, _LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray       # leaf mean (defined for every node)


@dataclass
class Forest:
    trees: list
    n_trees: int
    max_depth: int | None
    min_leaf: int
    features_per_split: int
    bootstrap: bool
    seed: int
    n_features: int
    inbag: list = field(default_factory=list, repr=False)


def _best_split(Xn, yn, feature_ids, min_leaf):
    """Best (feature, threshold, sse_gain) over candidate features, or None."""
    n = yn.shape[0]
    best = None
    base_sum = yn.sum()
    for f in feature_ids:
        order = np.argsort(Xn[:, f], kind="stable")
        xs = Xn[order, f]
        ys = yn[order]
        csum = np.cumsum(ys)
        left_n = np.arange(1, n)
        valid = (left_n >= min_leaf) & (left_n <= n - min_leaf)
        valid &= xs[1:] > xs[:-1]
        if not valid.any():
            continue
        left_sum = csum[:-1]
        right_sum = base_sum - left_sum
        score = left_sum**2 / left_n + right_sum**2 / (n - left_n)
        score = np.where(valid, score, -np.inf)
        j = int(np.argmax(score))
        if not np.isfinite(score[j]):
            continue
        gain = float(score[j])
        if best is None or gain > best[2]:
            best = (f, 0.5 * (xs[j] + xs[j + 1]), gain)
    return best


def _grow_tree(X, y, max_depth, min_leaf, features_per_split, rng):
    feature, threshold, left, right, value = [], [], [], [], []
    stack = [(np.arange(y.shape[0]), 0, None, False)]
    p = X.shape[1]
    while stack:
        idx, depth, parent, is_right = stack.pop()
        node = len(feature)
        if parent is not None:
            (right if is_right else left)[parent] = node
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        yn = y[idx]
        value.append(float(yn.mean()))
        if (max_depth is not None and depth >= max_depth) or yn.shape[0] < 2 * min_leaf:
            continue
        if np.all(yn == yn[0]):
            continue
        f_ids = rng.choice(p, size=min(features_per_split, p), replace=False)
        found = _best_split(X[idx], yn, f_ids, min_leaf)
        if found is None:
            continue
        f, thr, _ = found
        mask = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        stack.append((idx[~mask], depth + 1, node, True))
        stack.append((idx[mask], depth + 1, node, False))
    return _Tree(np.array(feature), np.array(threshold),
                 np.array(left), np.array(right), np.array(value))


def rf_fit(X, y, n_trees=500, max_depth=None, min_leaf=5, features_per_split=None,
           bootstrap=True, seed=0, keep_inbag=False):
    """Fit a regression forest; deterministic given (data, settings, seed)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, p) with matching response length")
    n, p = X.shape
    if n == 0:
        raise ValueError("empty training data")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("training data contains non-finite values")
    if n < 2 * min_leaf:
        raise ValueError(f"need at least {2 * min_leaf} rows for min_leaf={min_leaf}")
    if features_per_split is None:
        features_per_split = max(1, int(np.ceil(p / 3)))
    streams = np.random.SeedSequence(seed).spawn(n_trees)
    trees, inbag = [], []
    for t in range(n_trees):
        rng = np.random.default_rng(streams[t])
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
        trees.append(_grow_tree(X[rows], y[rows], max_depth, min_leaf,
                                features_per_split, rng))
        if keep_inbag:
            inbag.append(rows)
    return Forest(trees, n_trees, max_depth, min_leaf, features_per_split,
                  bootstrap, seed, p, inbag)


def _tree_predict(tree, X):
    out = np.empty(X.shape[0])
    stack = [(0, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        f = tree.feature[node]
        if f == _LEAF:
            out[idx] = tree.value[node]
            continue
        mask = X[idx, f] <= tree.threshold[node]
        if mask.any():
            stack.append((tree.left[node], idx[mask]))
        if (~mask).any():
            stack.append((tree.right[node], idx[~mask]))
    return out


def rf_predict(forest, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != forest.n_features:
        raise ValueError(f"expected (n, {forest.n_features}) feature matrix")
    total = np.zeros(X.shape[0])
    for tree in forest.trees:
        total += _tree_predict(tree, X)
    return total / forest.n_trees


def rf_oob_predict(forest, X):
    """Out-of-bag predictions on the training matrix; rows that are in-bag
    everywhere fall back to the full-forest prediction."""
    if not forest.inbag:
        raise ValueError("forest was fitted without keep_inbag")
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    total = np.zeros(n)
    count = np.zeros(n)
    for tree, rows in zip(forest.trees, forest.inbag):
        oob = np.ones(n, dtype=bool)
        oob[rows] = False
        if oob.any():
            total[oob] += _tree_predict(tree, X[oob])
            count[oob] += 1
    never = count == 0
    pred = np.divide(total, count, out=np.zeros(n), where=count > 0)
    if never.any():
        pred[never] = rf_predict(forest, X[never])
    return pred


# ---------------------------------------------------------------------------
# Kernels

def kernel_weights(u, kernel):
    u = np.asarray(u, dtype=float)
    if kernel == "epanechnikov":
        return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u**2), 0.0)
    if kernel == "gaussian":
        return np.exp(-0.5 * u**2) / np.sqrt(2.0 * np.pi)
    raise ValueError(f"unknown kernel {kernel!r}")


@dataclass(frozen=True)
class Bandwidth:
    h: float
    kernel: str
    cv_score: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("bandwidth must be positive")


def kernel_smooth(a0, A, values, bandwidth, kernel=None):
    """Nadaraya-Watson estimate at a0; raises OutOfSupportError when a compact
    kernel carries no weight there."""
    if isinstance(bandwidth, Bandwidth):
        h, kern = bandwidth.h, bandwidth.kernel
    else:
        h, kern = float(bandwidth), kernel or "epanechnikov"
    A = np.asarray(A, dtype=float)
    values = np.asarray(values, dtype=float)
    w = kernel_weights((A - a0) / h, kern)
    total = w.sum()
    if total <= 0:
        raise OutOfSupportError(f"no kernel mass at query point {a0}")
    return float((w @ values) / total)


def cv_bandwidth(A, values, kernel="epanechnikov", h_grid=None, n_folds=5, seed=0,
                 max_points=4000):
    """K-fold cross-validated bandwidth; ties break toward the larger h.

    Held-out points with no kernel mass are predicted by the training mean,
    so coarse bandwidths are penalised but never crash the search. Selection
    runs on a deterministic subsample when n exceeds `max_points`; the
    pairwise weight matrix is quadratic in n.
    """
    A = np.asarray(A, dtype=float)
    values = np.asarray(values, dtype=float)
    if h_grid is None or len(h_grid) == 0:
        raise ValueError("bandwidth grid must be non-empty")
    if n_folds < 2:
        raise ValueError("need at least two folds")
    h_grid = np.sort(np.asarray(h_grid, dtype=float))
    if A.shape[0] > max_points:
        pick = np.random.default_rng(seed + 7).choice(A.shape[0], max_points,
                                                      replace=False)
        A, values = A[pick], values[pick]
    n = A.shape[0]
    folds = np.random.default_rng(seed).permutation(n) % n_folds
    scores = np.zeros(h_grid.shape[0])
    for fold in range(n_folds):
        test = folds == fold
        A_tr, v_tr = A[~test], values[~test]
        A_te, v_te = A[test], values[test]
        fallback = float(v_tr.mean())
        for j, h in enumerate(h_grid):
            w = kernel_weights((A_te[:, None] - A_tr[None, :]) / h, kernel)
            tot = w.sum(axis=1)
            pred = np.where(tot > 0, (w @ v_tr) / np.where(tot > 0, tot, 1.0),
                            fallback)
            scores[j] += float(((pred - v_te) ** 2).sum())
    scores /= n
    best = scores.min()
    tol = 1e-9 * (abs(best) + float(values.var()) + 1e-12)
    idx = int(np.flatnonzero(scores <= best + tol).max())
    return Bandwidth(h=float(h_grid[idx]), kernel=kernel, cv_score=float(scores[idx]))


# ---------------------------------------------------------------------------
# Conditional density of a continuous treatment

@dataclass
class CondDensity:
    mean_model: Forest
    residuals: np.ndarray
    h_r: float
    kernel: str
    train_means: np.ndarray | None = None

    def mean_at(self, X):
        return rf_predict(self.mean_model, X)

    def residual_kde(self, v):
        """Density of the residual distribution at deviation(s) v."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        out = np.empty(v.shape[0])
        chunk = max(1, 4_000_000 // max(self.residuals.shape[0], 1))
        for start in range(0, v.shape[0], chunk):
            u = (v[start:start + chunk, None] - self.residuals[None, :]) / self.h_r
            out[start:start + chunk] = (
                kernel_weights(u, self.kernel).mean(axis=1) / self.h_r)
        return out

    def density_given_mean(self, a, m):
        """pi(a | x) evaluated elementwise with precomputed means m(x)."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        m = np.atleast_1d(np.asarray(m, dtype=float))
        return self.residual_kde(a - m)

    def marginal_density(self, a, grid_size=1024):
        """pibar(a) = (1/n) sum_j pi(a | x_j) over the training covariates.

        The residual KDE is tabulated once on a fine deviation grid; the
        average over training means is then interpolation, keeping the cost
        linear instead of cubic in n.
        """
        if self.train_means is None:
            raise ValueError("density was fitted without cached training means")
        a = np.atleast_1d(np.asarray(a, dtype=float))
        m = self.train_means
        dev_lo = a.min() - m.max() - 4 * self.h_r
        dev_hi = a.max() - m.min() + 4 * self.h_r
        dev_grid = np.linspace(dev_lo, dev_hi, grid_size)
        kde_grid = self.residual_kde(dev_grid)
        out = np.empty(a.shape[0])
        for i in range(a.shape[0]):
            out[i] = np.interp(a[i] - m, dev_grid, kde_grid).mean()
        return out


def cond_density_fit(a, X, n_trees=200, max_depth=None, min_leaf=5,
                     kernel="epanechnikov", seed=0, degenerate_tol=0.15,
                     n_folds=5):
    """Fit pi(a | x) = kde(a - m(x)) with m a regression forest.

    Degeneracy (the treatment is a deterministic function of the covariates)
    is flagged from the mean model's in-sample residual spread; the density
    itself uses out-of-bag residuals, whose spread stays honest. The residual
    bandwidth starts from the usual plug-in rule and is refined by k-fold
    held-out log-likelihood.
    """
    a = np.asarray(a, dtype=float)
    X = np.asarray(X, dtype=float)
    forest = rf_fit(X, a, n_trees=n_trees, max_depth=max_depth, min_leaf=min_leaf,
                    seed=seed, keep_inbag=True)
    spread = max(float(a.std()), 1e-12)
    insample = a - rf_predict(forest, X)
    if float(insample.std()) < degenerate_tol * spread:
        raise DegenerateDensityError(
            "treatment is (numerically) a deterministic function of the covariates")
    resid = a - rf_oob_predict(forest, X)

    sd = float(resid.std())
    iqr = float(np.subtract(*np.percentile(resid, [75, 25])))
    sigma = min(sd, iqr / 1.34) if iqr > 0 else sd
    # Select by held-out Gaussian log-likelihood (compact kernels zero out in
    # the tails and wreck likelihood CV), then rescale to the target kernel's
    # canonical bandwidth.
    h0 = 1.06 * sigma * resid.shape[0] ** (-0.2)
    h_grid = h0 * np.array([0.4, 0.6, 0.8, 1.0, 1.4, 2.0])
    folds = np.random.default_rng(seed + 1).permutation(resid.shape[0]) % n_folds
    best_h, best_ll = h0, -np.inf
    for h in h_grid:
        ll = 0.0
        for fold in range(n_folds):
            test = folds == fold
            train = resid[~test]
            u = (resid[test][:, None] - train[None, :]) / h
            dens = kernel_weights(u, "gaussian").mean(axis=1) / h
            ll += float(np.log(np.maximum(dens, 1e-300)).sum())
        if ll > best_ll:
            best_ll, best_h = ll, float(h)
    if kernel == "epanechnikov":
        best_h *= 2.34 / 1.06
    return CondDensity(forest, resid, best_h, kernel,
                       train_means=rf_predict(forest, X))


def cond_density_eval(model, a, x):
    """pi(a | x) for a single query pair or aligned vectors."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m = model.mean_at(x)
    out = model.density_given_mean(a, m)
    return float(out[0]) if out.shape[0] == 1 else out
