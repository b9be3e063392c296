"""Panel estimators: fixed-effects OLS, 2SLS, and the doubly-robust
continuous-treatment dose-response stack.

Fixed effects are absorbed by iterated within-group demeaning (alternating
projections, tolerance 1e-10). Cluster-robust covariances use the CR1
small-sample factor (G/(G-1)) * ((N-1)/(N-K)); with one observation per
cluster this reduces exactly to HC1.

The dose-response estimator follows the two-step pseudo-outcome recipe:

    xi = (Y - mu(X, A)) / pi(A | X) * pibar(A) + mubar(A)

with pibar(a) and mubar(a) sample averages over the empirical covariate
distribution, followed by a local-constant kernel regression of xi on A. It
is doubly robust: either nuisance may be arbitrarily wrong as long as the
other is consistent.
"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from .learners import (
    Bandwidth,
    OutOfSupportError,
    cv_bandwidth,
    kernel_weights,
    rf_predict,
)

DEMEAN_TOL = 1e-10
DEMEAN_MAX_ITER = 10_000
DENSITY_TRIM = 0.01


class EstimationError(RuntimeError):
    pass


@dataclass
class RegressionSpec:
    """What to regress on what, with which absorbed groups and clustering."""

    outcome: str
    treatments: list
    covariates: list = field(default_factory=list)
    fixed_effects: list = field(default_factory=list)
    cluster: str | None = None
    interactions: list = field(default_factory=list)  # (treatment, by_column, n_bins)
    sample_filter: object = None                      # callable panel -> bool mask


@dataclass
class EstimateResult:
    names: list
    coef: np.ndarray
    se: np.ndarray
    vcov: np.ndarray
    n_obs: int
    n_clusters: int | None
    r2_within: float
    df_inference: int
    notes: dict = field(default_factory=dict)
    first_stage: dict | None = None

    def __getitem__(self, name):
        return float(self.coef[self.names.index(name)])

    def se_of(self, name):
        return float(self.se[self.names.index(name)])

    def tstat(self, name):
        se = self.se_of(name)
        coef = self[name]
        if se == 0.0:
            return 0.0 if coef == 0.0 else float(np.sign(coef)) * float("inf")
        return coef / se

    def pvalue(self, name):
        return float(2.0 * stats.t.sf(abs(self.tstat(name)), self.df_inference))

    def conf_int(self, name, level=0.95):
        half = stats.t.ppf(0.5 + level / 2.0, self.df_inference) * self.se_of(name)
        return self[name] - half, self[name] + half

    def stars(self, name):
        p = self.pvalue(name)
        return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else ""

    def summary(self, title="estimate"):
        lines = [title, "-" * max(42, len(title))]
        for name in self.names:
            lines.append(f"{name:<38s} {self[name]:>10.4f}{self.stars(name):<3s} "
                         f"({self.se_of(name):.4f})")
        lines.append(f"N = {self.n_obs}"
                     + (f", clusters = {self.n_clusters}" if self.n_clusters else "")
                     + f", within R2 = {self.r2_within:.4f}")
        if self.first_stage is not None:
            fs = self.first_stage
            lines.append(f"first stage: coef = {fs['coef']:.4f} ({fs['se']:.4f}), "
                         f"F = {fs['F']:.1f}" + ("  [weak]" if fs["weak"] else ""))
        for key, val in self.notes.items():
            lines.append(f"note: {key} = {val}")
        return "\n".join(lines)

    def to_dict(self):
        out = {
            "coefficients": {n: _round(self[n]) for n in self.names},
            "standard_errors": {n: _round(self.se_of(n)) for n in self.names},
            "p_values": {n: _round(self.pvalue(n)) for n in self.names},
            "n_obs": self.n_obs,
            "n_clusters": self.n_clusters,
            "r2_within": _round(self.r2_within),
            "notes": {k: (_round(v) if isinstance(v, float) else v)
                      for k, v in self.notes.items()},
        }
        if self.first_stage is not None:
            out["first_stage"] = {k: (_round(v) if isinstance(v, float) else v)
                                  for k, v in self.first_stage.items()}
        return out


def _round(x, digits=12):
    return float(f"{float(x):.{digits}g}")


def tercile_indicators(values, n_bins=3):
    """Quantile-bin indicator matrix computed on the estimation sample."""
    values = np.asarray(values, dtype=float)
    qs = np.quantile(values, np.linspace(0, 1, n_bins + 1)[1:-1])
    bins = np.searchsorted(qs, values, side="left")
    out = np.zeros((values.shape[0], n_bins))
    out[np.arange(values.shape[0]), bins] = 1.0
    return out


def build_design(panel, spec):
    """Numeric design matrix: treatments, covariates, expanded interactions.

    Interaction entries (treatment, by, n_bins) add treatment x quantile-bin
    columns named `<treatment>_x_<by>_q<i>`; bins are computed on the sample.
    """
    names = []
    cols = []
    for name in list(spec.treatments) + list(spec.covariates):
        if name not in panel.columns:
            raise ValueError(f"unknown design column {name!r}")
        names.append(name)
        cols.append(panel[name].to_numpy(dtype=float))
    for treatment, by, n_bins in spec.interactions:
        for col in (treatment, by):
            if col not in panel.columns:
                raise ValueError(f"unknown design column {col!r}")
        bins = tercile_indicators(panel[by].to_numpy(dtype=float), n_bins)
        t = panel[treatment].to_numpy(dtype=float)
        for b in range(n_bins):
            names.append(f"{treatment}_x_{by}_q{b + 1}")
            cols.append(t * bins[:, b])
    return np.column_stack(cols), names


def _group_codes(panel, columns):
    return [pd.factorize(panel[col], use_na_sentinel=False)[0] for col in columns]


def _drop_singletons(codes_list, n):
    """Iteratively drop rows that are alone in any fixed-effect group."""
    keep = np.ones(n, dtype=bool)
    changed = True
    while changed:
        changed = False
        for codes in codes_list:
            counts = np.bincount(codes[keep], minlength=codes.max() + 1)
            single = counts[codes] == 1
            hit = keep & single
            if hit.any():
                keep[hit] = False
                changed = True
    return keep


def _demean(matrix, codes_list):
    """Alternating within-group projections of all columns jointly."""
    if not codes_list:
        return matrix, 0
    work = matrix.copy()
    sizes = [np.bincount(c).astype(float) for c in codes_list]
    scale = max(1.0, float(np.abs(work).max()))
    for it in range(DEMEAN_MAX_ITER):
        delta = 0.0
        for codes, size in zip(codes_list, sizes):
            for j in range(work.shape[1]):
                means = np.bincount(codes, weights=work[:, j]) / size
                adj = means[codes]
                work[:, j] -= adj
                delta = max(delta, float(np.abs(adj).max()))
        if delta <= DEMEAN_TOL * scale:
            return work, it + 1
    raise EstimationError("within-demeaning did not converge")


def _check_rank(X, names):
    if X.shape[1] == 0:
        raise EstimationError("empty design matrix")
    _, r, piv = _qr_pivot(X)
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(X.shape) * np.finfo(float).eps * 100 if diag.size else 0.0
    bad = [names[piv[i]] for i in range(len(diag)) if diag[i] <= tol]
    if bad or len(diag) < X.shape[1]:
        bad = bad or [names[p] for p in piv[len(diag):]]
        raise EstimationError(f"collinear design columns after demeaning: {bad}")


def _qr_pivot(X):
    from scipy.linalg import qr
    q, r, piv = qr(X, mode="economic", pivoting=True)
    return q, r, piv


def _cr1_vcov(X, resid, cluster_codes, xtx_inv, k_absorbed=0):
    """CR1 sandwich; `k_absorbed` counts fixed-effect levels swept out by
    demeaning so the small-sample factor sees the true parameter count."""
    n, k = X.shape
    k_total = k + k_absorbed
    scores = X * resid[:, None]
    if cluster_codes is None:
        meat = scores.T @ scores
        factor = n / max(n - k_total, 1)
        n_clusters = None
    else:
        g = int(cluster_codes.max()) + 1
        sums = np.zeros((g, k))
        for j in range(k):
            sums[:, j] = np.bincount(cluster_codes, weights=scores[:, j], minlength=g)
        meat = sums.T @ sums
        factor = (g / (g - 1)) * ((n - 1) / max(n - k_total, 1))
        n_clusters = g
    vcov = factor * xtx_inv @ meat @ xtx_inv
    return 0.5 * (vcov + vcov.T), n_clusters


def _absorbed_count(codes_list):
    if not codes_list:
        return 0
    levels = sum(int(c.max()) + 1 for c in codes_list)
    return levels - (len(codes_list) - 1)


def _prepare(panel, spec, extra_cols=()):
    used = ([spec.outcome] + list(spec.treatments) + list(spec.covariates)
            + list(spec.fixed_effects) + list(extra_cols)
            + [by for _, by, _ in spec.interactions])
    if spec.cluster:
        used.append(spec.cluster)
    missing = [c for c in used if c not in panel.columns]
    if missing:
        raise ValueError(f"panel lacks column(s) {missing}")
    data = panel
    if spec.sample_filter is not None:
        data = data[spec.sample_filter(data)]
    data = data.dropna(subset=[c for c in used if c in data.columns])
    if len(data) == 0:
        raise EstimationError("no observations left after filtering")
    return data.reset_index(drop=True)


def fe_ols(panel, spec):
    """OLS with absorbed fixed effects and CR1 cluster-robust errors.

    Singleton fixed-effect groups are dropped (and counted in the notes);
    inference uses t with G-1 degrees of freedom under clustering.
    """
    data = _prepare(panel, spec)
    X, names = build_design(data, spec)
    y = data[spec.outcome].to_numpy(dtype=float)
    n0 = len(data)

    codes_list = _group_codes(data, spec.fixed_effects)
    if codes_list:
        keep = _drop_singletons(codes_list, n0)
    else:
        keep = np.ones(n0, dtype=bool)
    dropped = int(n0 - keep.sum())
    if keep.sum() <= X.shape[1]:
        raise EstimationError("too few observations after singleton drop")
    data = data[keep].reset_index(drop=True)
    X, y = X[keep], y[keep]
    codes_list = _group_codes(data, spec.fixed_effects)

    stacked = np.column_stack([y, X])
    demeaned, iters = _demean(stacked, codes_list)
    y_w, X_w = demeaned[:, 0], demeaned[:, 1:]
    _check_rank(X_w, names)

    beta, *_ = np.linalg.lstsq(X_w, y_w, rcond=None)
    resid = y_w - X_w @ beta
    tss = float(y_w @ y_w)
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else 0.0

    xtx_inv = np.linalg.inv(X_w.T @ X_w)
    cluster_codes = (pd.factorize(data[spec.cluster])[0] if spec.cluster else None)
    vcov, n_clusters = _cr1_vcov(X_w, resid, cluster_codes, xtx_inv,
                                 k_absorbed=_absorbed_count(codes_list))
    df = (n_clusters - 1) if n_clusters else len(y_w) - X_w.shape[1]
    return EstimateResult(
        names=names, coef=beta, se=np.sqrt(np.diag(vcov)), vcov=vcov,
        n_obs=len(y_w), n_clusters=n_clusters, r2_within=r2, df_inference=df,
        notes={"singletons_dropped": dropped, "demeaning_iterations": iters},
    )


def tsls(panel, outcome, endogenous, instrument, covariates=(), fixed_effects=(),
         cluster=None, sample_filter=None):
    """Just-identified 2SLS with absorbed fixed effects and CR1 errors.

    Reports the first-stage coefficient, its cluster-robust SE and F; a weak
    first stage (F < 10) sets the `weak` flag but does not fail.
    """
    spec = RegressionSpec(outcome, [endogenous], list(covariates),
                          list(fixed_effects), cluster,
                          sample_filter=sample_filter)
    data = _prepare(panel, spec, extra_cols=[instrument])
    n0 = len(data)
    codes_list = _group_codes(data, spec.fixed_effects)
    keep = _drop_singletons(codes_list, n0) if codes_list else np.ones(n0, dtype=bool)
    data = data[keep].reset_index(drop=True)
    codes_list = _group_codes(data, spec.fixed_effects)

    y = data[outcome].to_numpy(dtype=float)
    d = data[endogenous].to_numpy(dtype=float)
    z = data[instrument].to_numpy(dtype=float)
    W = (data[list(covariates)].to_numpy(dtype=float)
         if covariates else np.empty((len(data), 0)))

    stacked = np.column_stack([y, d, z, W])
    demeaned, _ = _demean(stacked, codes_list)
    y_w, d_w, z_w, W_w = (demeaned[:, 0], demeaned[:, 1], demeaned[:, 2],
                          demeaned[:, 3:])
    names = [endogenous] + list(covariates)
    cluster_codes = pd.factorize(data[cluster])[0] if cluster else None

    # First stage: endogenous on instrument + exogenous controls.
    Z1 = np.column_stack([z_w, W_w])
    _check_rank(Z1, [instrument] + list(covariates))
    pi, *_ = np.linalg.lstsq(Z1, d_w, rcond=None)
    d_hat = Z1 @ pi
    fs_resid = d_w - d_hat
    fs_vcov, _ = _cr1_vcov(Z1, fs_resid, cluster_codes, np.linalg.inv(Z1.T @ Z1),
                           k_absorbed=_absorbed_count(codes_list))
    fs_se = float(np.sqrt(fs_vcov[0, 0]))
    fs_coef = float(pi[0])
    fs_F = (fs_coef / fs_se) ** 2
    first_stage = {"coef": fs_coef, "se": fs_se, "F": fs_F, "weak": fs_F < 10.0}

    X_hat = np.column_stack([d_hat, W_w])
    _check_rank(X_hat, names)
    beta, *_ = np.linalg.lstsq(X_hat, y_w, rcond=None)
    X_actual = np.column_stack([d_w, W_w])
    resid = y_w - X_actual @ beta

    bread = np.linalg.inv(X_hat.T @ X_hat)
    vcov, n_clusters = _cr1_vcov(X_hat, resid, cluster_codes, bread,
                                 k_absorbed=_absorbed_count(codes_list))
    df = (n_clusters - 1) if n_clusters else len(y_w) - X_hat.shape[1]
    tss = float(y_w @ y_w)
    return EstimateResult(
        names=names, coef=beta, se=np.sqrt(np.diag(vcov)), vcov=vcov,
        n_obs=len(y_w), n_clusters=n_clusters,
        r2_within=1.0 - float(resid @ resid) / tss if tss > 0 else 0.0,
        df_inference=df,
        notes={"singletons_dropped": int(n0 - keep.sum())},
        first_stage=first_stage,
    )


def subsample_split(panel, variable, at="median"):
    """Split a panel at the median of `variable`; ties go to the low panel."""
    values = panel[variable].to_numpy(dtype=float)
    if np.nanmin(values) == np.nanmax(values):
        raise EstimationError(f"cannot split on constant variable {variable!r}")
    if at != "median":
        raise ValueError("only median splits are supported")
    cut = float(np.nanmedian(values))
    low = panel[values <= cut]
    high = panel[values > cut]
    return low, high


# ---------------------------------------------------------------------------
# Doubly-robust continuous-treatment machinery


@dataclass
class DoseResponseCurve:
    grid: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    bandwidth: Bandwidth
    in_support: np.ndarray
    xi: np.ndarray
    treatment: np.ndarray


def pseudo_outcome(y, a, X, cond_density, mean_model, trim=DENSITY_TRIM,
                   marginal_grid=257):
    """Doubly-robust pseudo-outcome vector.

    mubar(a) = (1/n) sum_j mu(x_j, a) is evaluated on a dense grid of a and
    interpolated at the observed treatments (exact n^2 forest prediction is
    avoided); pibar(a_i) = (1/n) sum_j pi(a_i | x_j) is exact. Densities are
    floored at `trim` before division; the trim share is reported.
    """
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    X = np.asarray(X, dtype=float)
    n = y.shape[0]

    mu_hat = rf_predict(mean_model, np.column_stack([X, a]))
    m_hat = cond_density.mean_at(X)
    pi_hat = cond_density.density_given_mean(a, m_hat)

    # pibar(a_i): average conditional density over all training means.
    pibar = cond_density.marginal_density(a)

    grid = np.linspace(a.min(), a.max(), marginal_grid)
    mubar_grid = np.empty(marginal_grid)
    for g, a0 in enumerate(grid):
        mubar_grid[g] = rf_predict(
            mean_model, np.column_stack([X, np.full(n, a0)])).mean()
    mubar = np.interp(a, grid, mubar_grid)

    trimmed = pi_hat < trim
    if trimmed.all():
        raise EstimationError("every observation was density-trimmed")
    pi_used = np.maximum(pi_hat, trim)
    xi = (y - mu_hat) / pi_used * pibar + mubar
    return xi, {"trim_rate": float(trimmed.mean()), "pi_min": float(pi_hat.min())}


def oracle_pseudo_outcome(y, a, X, pi_func, mu_func, trim=DENSITY_TRIM,
                          marginal_grid=401):
    """Pseudo-outcome with caller-supplied nuisance functions.

    pi_func(a_vec, X) -> conditional density values; mu_func(X, a_vec) ->
    conditional means. Used for oracle and deliberately-corrupted nuisances.
    The marginal averages over the empirical covariate law are tabulated on a
    dense treatment grid and interpolated at the observed doses.
    """
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    X = np.asarray(X, dtype=float)
    n = y.shape[0]
    pi_hat = np.maximum(pi_func(a, X), trim)
    mu_hat = mu_func(X, a)
    grid = np.linspace(a.min(), a.max(), marginal_grid)
    pibar_grid = np.empty(marginal_grid)
    mubar_grid = np.empty(marginal_grid)
    for g, a0 in enumerate(grid):
        av = np.full(n, a0)
        pibar_grid[g] = pi_func(av, X).mean()
        mubar_grid[g] = mu_func(X, av).mean()
    pibar = np.interp(a, grid, pibar_grid)
    mubar = np.interp(a, grid, mubar_grid)
    return (y - mu_hat) / pi_hat * pibar + mubar


def dose_response(xi, a, kernel="epanechnikov", bandwidth=None, h_grid=None,
                  n_grid=101, n_folds=5, seed=0, grid_quantiles=(0.01, 0.99),
                  undersmooth=0.6):
    """Local-constant regression of the pseudo-outcome on the treatment.

    The grid spans the inner quantile range of A. Pointwise 90% bands use
    the kernel-weighted sandwich variance. Grid points with no kernel mass
    are flagged out-of-support, never extrapolated.

    A cross-validated bandwidth targets estimation error; for honest bands it
    is shrunk by `undersmooth` (set 1.0 to disable), the usual trick that
    keeps smoothing bias below the band width.
    """
    xi = np.asarray(xi, dtype=float)
    a = np.asarray(a, dtype=float)
    if not np.isfinite(xi).all():
        raise ValueError("pseudo-outcome contains non-finite values")
    if isinstance(bandwidth, Bandwidth):
        bw = bandwidth
    elif bandwidth is not None:
        bw = Bandwidth(h=float(bandwidth), kernel=kernel, cv_score=float("nan"))
    else:
        if h_grid is None:
            sd = float(a.std())
            h_grid = sd * np.array([0.15, 0.25, 0.4, 0.6, 0.9, 1.3, 2.0])
        bw = cv_bandwidth(a, xi, kernel=kernel, h_grid=h_grid, n_folds=n_folds,
                          seed=seed)
        bw = Bandwidth(h=bw.h * undersmooth, kernel=bw.kernel, cv_score=bw.cv_score)

    lo, hi = np.quantile(a, grid_quantiles)
    grid = np.linspace(lo, hi, n_grid)
    est = np.full(n_grid, np.nan)
    lower = np.full(n_grid, np.nan)
    upper = np.full(n_grid, np.nan)
    ok = np.zeros(n_grid, dtype=bool)
    z90 = stats.norm.ppf(0.95)
    for i, a0 in enumerate(grid):
        w = kernel_weights((a - a0) / bw.h, bw.kernel)
        total = w.sum()
        if total <= 0:
            continue
        ok[i] = True
        mu = float((w @ xi) / total)
        var_local = float((w @ (xi - mu) ** 2) / total)
        se = np.sqrt(var_local * float((w**2).sum()) / total**2)
        est[i], lower[i], upper[i] = mu, mu - z90 * se, mu + z90 * se
    return DoseResponseCurve(grid, est, lower, upper, bw, ok, xi, a)


def ate_between(curve, a1, a0):
    """Difference quotient of the dose-response curve between two doses."""
    if a1 == a0:
        raise ValueError("treatment levels must differ")
    vals = []
    for point in (a1, a0):
        idx = int(np.argmin(np.abs(curve.grid - point)))
        if not curve.in_support[idx]:
            raise OutOfSupportError(f"dose {point} is outside the fitted support")
        vals.append(curve.estimate[idx])
    snap1 = curve.grid[int(np.argmin(np.abs(curve.grid - a1)))]
    snap0 = curve.grid[int(np.argmin(np.abs(curve.grid - a0)))]
    if snap1 == snap0:
        raise ValueError("treatment levels snap to the same grid point")
    return float((vals[0] - vals[1]) / (snap1 - snap0))
