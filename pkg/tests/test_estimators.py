import numpy as np
import pandas as pd
import pytest
from scipy import stats

from contestlab.estimators import (
    EstimationError, RegressionSpec, ate_between, build_design, dose_response,
    fe_ols, oracle_pseudo_outcome, pseudo_outcome, subsample_split,
    tercile_indicators, tsls,
)
from contestlab.learners import cond_density_fit, rf_fit


def fe_panel(seed=0, n=800, n_groups=40):
    rng = np.random.default_rng(seed)
    g = rng.integers(0, n_groups, n)
    h = rng.integers(0, 12, n)
    x = rng.normal(0, 1, n)
    w = rng.normal(0, 1, n)
    y = 2.0 * x - 1.0 * w + 0.7 * g + 0.4 * h + rng.normal(0, 1, n)
    return pd.DataFrame({"y": y, "x": x, "w": w, "g": g, "h": h,
                         "cl": rng.integers(0, 30, n)})


class TestFeOls:
    def test_exact_noiseless(self):
        rng = np.random.default_rng(0)
        df = pd.DataFrame({"D": rng.normal(0, 1, 100)})
        df["y"] = 2.0 * df.D
        res = fe_ols(df, RegressionSpec("y", ["D"]))
        assert res["D"] == pytest.approx(2.0)
        assert res.se_of("D") == pytest.approx(0.0, abs=1e-10)

    def test_demeaning_equals_dummies(self):
        df = fe_panel()
        r1 = fe_ols(df, RegressionSpec("y", ["x"], ["w"], ["g"]))
        dummies = pd.get_dummies(df.g, prefix="g").astype(float)
        df2 = pd.concat([df, dummies], axis=1)
        r2 = fe_ols(df2, RegressionSpec("y", ["x"], ["w"] + list(dummies.columns)))
        assert r1["x"] == pytest.approx(r2["x"], abs=1e-8)

    def test_two_way_fe_recovers_truth(self):
        df = fe_panel(n=4000)
        res = fe_ols(df, RegressionSpec("y", ["x"], ["w"], ["g", "h"], cluster="cl"))
        assert res["x"] == pytest.approx(2.0, abs=0.1)
        assert res["w"] == pytest.approx(-1.0, abs=0.1)

    def test_cr1_equals_hc1_with_singleton_clusters(self):
        df = fe_panel()
        df["cid"] = np.arange(len(df))
        rc = fe_ols(df, RegressionSpec("y", ["x"], ["w"], ["g"], cluster="cid"))
        rh = fe_ols(df, RegressionSpec("y", ["x"], ["w"], ["g"]))
        assert rc.se_of("x") == pytest.approx(rh.se_of("x"), rel=1e-12)

    def test_residual_orthogonality(self):
        df = fe_panel()
        spec = RegressionSpec("y", ["x"], ["w"], ["g", "h"])
        res = fe_ols(df, spec)
        # rebuild the demeaned system and check residual orthogonality
        from contestlab.estimators import _demean, _group_codes
        X, _ = build_design(df, spec)
        y = df.y.to_numpy()
        dm, _ = _demean(np.column_stack([y, X]), _group_codes(df, ["g", "h"]))
        resid = dm[:, 0] - dm[:, 1:] @ res.coef
        for j in range(X.shape[1]):
            scale = np.abs(dm[:, 1 + j]).sum() or 1.0
            assert abs(resid @ dm[:, 1 + j]) <= 1e-8 * scale * len(df)

    def test_collinear_columns_named(self):
        df = fe_panel()
        df["x2"] = 2.0 * df.x
        with pytest.raises(EstimationError, match="x"):
            fe_ols(df, RegressionSpec("y", ["x", "x2"], [], ["g"]))

    def test_singletons_dropped_and_counted(self):
        df = fe_panel(n=200, n_groups=190)
        res = fe_ols(df, RegressionSpec("y", ["x"], [], ["g"]))
        counts = df.g.value_counts()
        assert res.notes["singletons_dropped"] >= (counts == 1).sum()
        assert res.n_obs < len(df)

    def test_row_order_invariance(self):
        df = fe_panel()
        spec = RegressionSpec("y", ["x"], ["w"], ["g", "h"], cluster="cl")
        r1 = fe_ols(df, spec)
        r2 = fe_ols(df.sample(frac=1.0, random_state=3), spec)
        assert r1["x"] == pytest.approx(r2["x"], abs=1e-8)
        assert r1.se_of("x") == pytest.approx(r2.se_of("x"), abs=1e-8)

    def test_covariate_scaling(self):
        df = fe_panel()
        spec = RegressionSpec("y", ["x"], ["w"], ["g"], cluster="cl")
        r1 = fe_ols(df, spec)
        df2 = df.assign(w=df.w * 10.0)
        r2 = fe_ols(df2, spec)
        assert r2["w"] == pytest.approx(r1["w"] / 10.0, rel=1e-8)
        assert r2.tstat("w") == pytest.approx(r1.tstat("w"), rel=1e-8)
        assert r2["x"] == pytest.approx(r1["x"], rel=1e-8)

    def test_empty_after_filter(self):
        df = fe_panel()
        spec = RegressionSpec("y", ["x"], sample_filter=lambda d: d.x > 99)
        with pytest.raises(EstimationError):
            fe_ols(df, spec)

    def test_vcov_psd(self):
        df = fe_panel()
        res = fe_ols(df, RegressionSpec("y", ["x"], ["w"], ["g"], cluster="cl"))
        eigs = np.linalg.eigvalsh(res.vcov)
        assert eigs.min() >= -1e-12


class TestBuildDesign:
    def test_plain_columns(self):
        df = fe_panel()
        X, names = build_design(df, RegressionSpec("y", ["x"], ["w"]))
        assert names == ["x", "w"]
        assert np.array_equal(X[:, 0], df.x.to_numpy())

    def test_tercile_indicators_balanced(self):
        rng = np.random.default_rng(0)
        vals = rng.uniform(0, 1, 900)
        ind = tercile_indicators(vals, 3)
        assert ind.shape == (900, 3)
        assert np.allclose(ind.sum(axis=0), 300, atol=5)
        assert np.array_equal(ind.sum(axis=1), np.ones(900))

    def test_interaction_is_elementwise_product(self):
        df = fe_panel()
        spec = RegressionSpec("y", ["x"], [], interactions=[("x", "w", 3)])
        X, names = build_design(df, spec)
        ind = tercile_indicators(df.w.to_numpy(), 3)
        for b in range(3):
            j = names.index(f"x_x_w_q{b + 1}")
            assert np.allclose(X[:, j], df.x.to_numpy() * ind[:, b])

    def test_unknown_column(self):
        df = fe_panel()
        with pytest.raises(ValueError, match="nope"):
            build_design(df, RegressionSpec("y", ["nope"]))


class TestTsls:
    @staticmethod
    def iv_panel(seed=0, n=4000):
        rng = np.random.default_rng(seed)
        g = rng.integers(0, 25, n)
        z = rng.normal(0, 1, n)
        u = rng.normal(0, 1, n)          # endogenous noise
        d = 1.0 * z + 0.8 * u + rng.normal(0, 1, n)
        y = -0.5 * d + 1.5 * u + 0.3 * g + rng.normal(0, 1, n)
        return pd.DataFrame({"y": y, "d": d, "z": z, "g": g,
                             "cl": rng.integers(0, 40, n)})

    def test_recovers_truth_under_endogeneity(self):
        df = self.iv_panel()
        iv = tsls(df, "y", "d", "z", fixed_effects=["g"], cluster="cl")
        assert iv["d"] == pytest.approx(-0.5, abs=3 * iv.se_of("d"))
        ols = fe_ols(df, RegressionSpec("y", ["d"], [], ["g"], cluster="cl"))
        assert abs(ols["d"] - (-0.5)) > 4 * ols.se_of("d")

    def test_self_instrument_equals_ols(self):
        df = self.iv_panel()
        iv = tsls(df, "y", "d", "d", fixed_effects=["g"], cluster="cl")
        ols = fe_ols(df, RegressionSpec("y", ["d"], [], ["g"], cluster="cl"))
        assert iv["d"] == pytest.approx(ols["d"], rel=1e-10)

    def test_indirect_least_squares_identity(self):
        df = self.iv_panel()
        iv = tsls(df, "y", "d", "z", fixed_effects=["g"])
        reduced = fe_ols(df, RegressionSpec("y", ["z"], [], ["g"]))
        first = fe_ols(df, RegressionSpec("d", ["z"], [], ["g"]))
        assert iv["d"] == pytest.approx(reduced["z"] / first["z"], abs=1e-8)

    def test_first_stage_reported(self):
        df = self.iv_panel()
        iv = tsls(df, "y", "d", "z", fixed_effects=["g"], cluster="cl")
        assert iv.first_stage["coef"] == pytest.approx(1.0, abs=0.1)
        assert iv.first_stage["F"] > 10
        assert not iv.first_stage["weak"]

    def test_weak_instrument_flagged(self):
        df = self.iv_panel()
        rng = np.random.default_rng(9)
        df["z_weak"] = 0.01 * df.z + rng.normal(0, 1, len(df))
        iv = tsls(df, "y", "d", "z_weak", fixed_effects=["g"], cluster="cl")
        assert iv.first_stage["weak"]


class TestSubsampleSplit:
    def test_even_split_on_index(self):
        df = pd.DataFrame({"v": np.arange(100, dtype=float)})
        low, high = subsample_split(df, "v")
        assert len(low) == 50 and len(high) == 50

    def test_ties_go_low(self):
        df = pd.DataFrame({"v": [1.0, 1.0, 1.0, 2.0]})
        low, high = subsample_split(df, "v")
        assert len(low) == 3 and len(high) == 1

    def test_constant_errors(self):
        df = pd.DataFrame({"v": np.ones(10)})
        with pytest.raises(EstimationError):
            subsample_split(df, "v")


def dr_data(n=4000, seed=0, slope=3.0, sd_y=1.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (n, 3))
    a = 0.6 * X[:, 0] + rng.normal(0, 0.8, n)
    y = 2.0 + slope * a + 1.5 * X[:, 0] - X[:, 1] + rng.normal(0, sd_y, n)
    return X, a, y


def oracle_nuisances(slope=3.0):
    def pi(a, X):
        return stats.norm.pdf(a, loc=0.6 * X[:, 0], scale=0.8)

    def mu(X, a):
        return 2.0 + slope * a + 1.5 * X[:, 0] - X[:, 1]

    return pi, mu


class TestPseudoOutcome:
    def test_constant_outcome_collapses(self):
        rng = np.random.default_rng(0)
        X = rng.normal(0, 1, (600, 3))
        a = rng.normal(0, 1, 600)
        y = np.full(600, 7.0)
        mean_model = rf_fit(np.column_stack([X, a]), y, n_trees=30, seed=0)
        density = cond_density_fit(a, X, n_trees=60, min_leaf=30, seed=1)
        xi, info = pseudo_outcome(y, a, X, density, mean_model)
        assert np.allclose(xi, 7.0)
        assert info["trim_rate"] == 0.0

    def test_oracle_conditional_mean(self):
        X, a, y = dr_data(6000, seed=1)
        pi, mu = oracle_nuisances()
        xi = oracle_pseudo_outcome(y, a, X, pi, mu)
        # E[xi | A = a] should match E[Y^a] = 2 + 3a
        for a0 in (-0.5, 0.0, 0.5):
            window = np.abs(a - a0) < 0.1
            assert xi[window].mean() == pytest.approx(
                2 + 3 * a0, abs=4 * xi[window].std() / np.sqrt(window.sum()))

    def test_double_robustness_directions(self):
        X, a, y = dr_data(8000, seed=2)
        pi, mu = oracle_nuisances()
        sd = a.std()

        def mu_wrong(X_, a_):
            return np.zeros(X_.shape[0])

        def pi_wrong(a_, X_):
            return stats.norm.pdf(a_, scale=1.0)

        for pi_f, mu_f in ((pi, mu_wrong), (pi_wrong, mu)):
            xi = oracle_pseudo_outcome(y, a, X, pi_f, mu_f)
            curve = dose_response(xi, a, seed=3, undersmooth=1.0)
            slope = ate_between(curve, a.mean() + sd, a.mean() - sd)
            assert abs(slope - 3.0) / 3.0 <= 0.10
        xi = oracle_pseudo_outcome(y, a, X, pi_wrong, mu_wrong)
        curve = dose_response(xi, a, seed=3, undersmooth=1.0)
        slope = ate_between(curve, a.mean() + sd, a.mean() - sd)
        assert abs(slope - 3.0) / 3.0 > 0.10

    def test_fitted_nuisance_slope(self):
        X, a, y = dr_data(3000, seed=4)
        mean_model = rf_fit(np.column_stack([X, a]), y, n_trees=100, min_leaf=10,
                            features_per_split=4, seed=4)
        density = cond_density_fit(a, X, n_trees=100, min_leaf=10, seed=5)
        xi, _ = pseudo_outcome(y, a, X, density, mean_model)
        curve = dose_response(xi, a, seed=4, undersmooth=1.0)
        slope = ate_between(curve, a.mean() + a.std(), a.mean() - a.std())
        assert slope == pytest.approx(3.0, abs=1.0)


class TestDoseResponse:
    def test_constant_curve(self):
        rng = np.random.default_rng(0)
        a = rng.normal(0, 1, 1000)
        curve = dose_response(np.full(1000, 3.3), a, bandwidth=0.3)
        assert np.allclose(curve.estimate[curve.in_support], 3.3)
        assert (curve.lower <= curve.estimate)[curve.in_support].all()
        assert (curve.upper >= curve.estimate)[curve.in_support].all()

    def test_linear_slope_constant_everywhere(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(-1, 1, 4000)
        xi = 1.0 + 3.0 * a + rng.normal(0, 0.2, 4000)
        curve = dose_response(xi, a, bandwidth=0.1)
        assert ate_between(curve, 0.5, -0.5) == pytest.approx(3.0, abs=0.3)
        assert ate_between(curve, 0.6, 0.0) == pytest.approx(3.0, abs=0.4)

    def test_planted_slope_large_sample(self):
        rng = np.random.default_rng(2)
        a = rng.normal(0, 1, 10_000)
        xi = 3.0 * a + rng.normal(0, 1, 10_000)
        curve = dose_response(xi, a, seed=2, undersmooth=1.0)
        slope = ate_between(curve, a.mean() + a.std(), a.mean() - a.std())
        assert slope == pytest.approx(3.0, abs=0.3)

    def test_grid_strictly_increasing(self):
        rng = np.random.default_rng(3)
        a = rng.normal(0, 1, 500)
        curve = dose_response(a, a, bandwidth=0.5)
        assert (np.diff(curve.grid) > 0).all()

    def test_non_finite_xi_rejected(self):
        a = np.linspace(0, 1, 50)
        xi = a.copy()
        xi[3] = np.nan
        with pytest.raises(ValueError):
            dose_response(xi, a, bandwidth=0.2)

    def test_equal_doses_rejected(self):
        rng = np.random.default_rng(4)
        a = rng.normal(0, 1, 300)
        curve = dose_response(a, a, bandwidth=0.4)
        with pytest.raises(ValueError):
            ate_between(curve, 0.1, 0.1)
