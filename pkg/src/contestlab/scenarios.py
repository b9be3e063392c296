"""Configuration-driven reproduction scenarios.

Each scenario simulates a panel from a (possibly overridden) generator
configuration, runs its estimator set, and writes JSON + text tables plus
CSV/SVG figure data under the output directory. Scenario names mirror the
exhibit they reproduce on synthetic data.
"""

import dataclasses
import json
from pathlib import Path

import numpy as np

from . import svg
from .contests import (
    BASELINE, CHOKING, REWARD_SCALED, REWARD_THETA,
    choking_peak_theta, effort_curve, write_curve_csv,
)
from .darts import CheckoutTable
from .estimators import (
    RegressionSpec, ate_between, dose_response, fe_ols, pseudo_outcome,
    subsample_split, tsls,
)
from .learners import cond_density_fit, kernel_weights, rf_fit
from .tournament import DgpConfig, TrueEffects, export_panel, run_tournaments

SCENARIOS = ("table2", "table3", "table4", "table5", "table6",
             "fig2", "fig3", "fig4", "fig5", "calibration", "placebo")

# Covariate sets used throughout; `own ability` replaces what individual
# effects cannot absorb once ability drifts across seasons.
UNDERDOG_COVARIATES = ["ability_underdog", "experience_favorite",
                       "experience_underdog", "favorite_starts",
                       "home_favorite", "home_underdog"]
FAVORITE_COVARIATES = ["ability_favorite", "experience_favorite",
                       "experience_underdog", "favorite_starts",
                       "home_favorite", "home_underdog"]

# Dose-response nuisance protocols per outcome side, lighter than the library
# defaults so a full scenario stays interactive. The favorite's conditional
# treatment density given own ability alone is boundary-skewed (the opponent
# draw truncates at the player's own level), so that side carries the
# opponent-ranking proxy and a finer mean forest; for the underdog the same
# proxy would absorb the identifying variation instead.
DR_PROTOCOL = {
    "underdog": {"controls": ["stage", "favorite_starts"],
                 "forest": {"n_trees": 150, "min_leaf": 8}},
    "favorite": {"controls": ["world_ranking_underdog", "stage", "favorite_starts"],
                 "forest": {"n_trees": 250, "min_leaf": 4}},
    "favorite_win": {"controls": ["world_ranking_underdog", "stage",
                                  "favorite_starts"],
                     "forest": {"n_trees": 150, "min_leaf": 8}},
}
DR_TRIM_TOP = 0.01


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class ScenarioConfig:
    scenario: str
    seed: int = 42
    out_dir: str = "out"
    dgp: dict = dataclasses.field(default_factory=dict)
    effects: dict = dataclasses.field(default_factory=dict)
    estimator: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"expected one of {SCENARIOS}")

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"malformed JSON in {path}: line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        unknown = set(raw) - {"scenario", "seed", "out_dir", "dgp", "effects",
                              "estimator"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "scenario" not in raw:
            raise ConfigError("config lacks required key 'scenario'")
        return cls(**raw)

    def build_dgp(self):
        fields = {f.name for f in dataclasses.fields(DgpConfig)}
        unknown = set(self.dgp) - fields
        if unknown:
            raise ConfigError(f"unknown dgp keys {sorted(unknown)}")
        kwargs = dict(self.dgp)
        if "checkout" in kwargs:
            kwargs["checkout"] = CheckoutTable(*kwargs["checkout"])
        if "k_by_stage" in kwargs:
            kwargs["k_by_stage"] = tuple(kwargs["k_by_stage"])
        if "calendar" in kwargs:
            kwargs["calendar"] = {int(k): list(v)
                                  for k, v in kwargs["calendar"].items()}
        return DgpConfig(**kwargs)

    def build_effects(self):
        fields = {f.name for f in dataclasses.fields(TrueEffects)}
        unknown = set(self.effects) - fields
        if unknown:
            raise ConfigError(f"unknown effects keys {sorted(unknown)}")
        return TrueEffects(**self.effects)


def _round(x, digits=12):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if x != x:
        return None
    return float(f"{float(x):.{digits}g}")


def write_json(path, payload):
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, (float, np.floating, int, np.integer, np.bool_, bool)):
            return _round(obj)
        return obj

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(config):
    path = Path(config.out_dir) / config.scenario
    path.mkdir(parents=True, exist_ok=True)
    return path


def _panel_for(config):
    return run_tournaments(config.build_dgp(), config.build_effects(), config.seed)


def with_underdog_starts(panel):
    return panel.assign(underdog_starts=1 - panel.favorite_starts)


# ---------------------------------------------------------------------------
# scenario: calibration

CALIBRATION_TARGETS = {
    "favorite_performance_mean": (102.254, 1.0),
    "underdog_performance_mean": (97.595, 1.0),
    "favorite_win_rate": (0.665, 0.03),
    "ability_ratio_mean": (1.055, 0.01),
    "ability_ratio_sd": (0.049, 0.01),
    "median_darts_per_leg": (15.0, 2.0),
}

REFERENCE_MOMENTS = {
    "mean_performance_mean": 99.924,
    "contest_length_fraction": 0.790,
    "n_180s_per_contest": 5.921,
    "underdog_starts_rate": 0.481,
    "opponent_known_rate": 0.588,
    "expected_ability_mean": 94.695,
}


def run_calibration(config):
    out = _outdir(config)
    panel, diag = run_tournaments(config.build_dgp(), config.build_effects(),
                                  config.seed, diagnostics=True)
    moments = {
        "favorite_performance_mean": panel.performance_favorite.mean(),
        "underdog_performance_mean": panel.performance_underdog.mean(),
        "favorite_win_rate": panel.favorite_wins.mean(),
        "ability_ratio_mean": panel.ability_ratio.mean(),
        "ability_ratio_sd": panel.ability_ratio.std(),
        "median_darts_per_leg": float(np.median(diag["darts_per_leg"])),
    }
    checks = {}
    for name, value in moments.items():
        target, tol = CALIBRATION_TARGETS[name]
        checks[name] = {"value": value, "target": target, "tolerance": tol,
                        "ok": bool(abs(value - target) <= tol)}
    info = {
        "mean_performance_mean": panel.performance_mean.mean(),
        "contest_length_fraction": panel.contest_length_fraction.mean(),
        "n_180s_per_contest": panel.n_180s.mean(),
        "underdog_starts_rate": 1.0 - panel.favorite_starts.mean(),
        "opponent_known_rate": panel.opponent_known.mean(),
        "expected_ability_mean": panel.expected_ability_next.mean(),
        "n_contests": len(panel),
        "favorite_performance_sd": panel.performance_favorite.std(),
        "underdog_performance_sd": panel.performance_underdog.std(),
    }
    export_panel(panel, out / "panel.csv")
    report = {"checks": checks, "informational": info,
              "all_ok": all(c["ok"] for c in checks.values())}
    write_json(out / "calibration.json", report)
    lines = ["calibration against the reference descriptive moments",
             "-" * 56]
    for name, c in checks.items():
        lines.append(f"{'PASS' if c['ok'] else 'FAIL'}  {name}: "
                     f"{c['value']:.4f} vs {c['target']} ± {c['tolerance']}")
    lines.append("informational (not gated):")
    for name, v in info.items():
        ref = REFERENCE_MOMENTS.get(name)
        lines.append(f"      {name}: {v:.4f}" + (f" (reference {ref})" if ref else ""))
    (out / "calibration.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return report


# ---------------------------------------------------------------------------
# scenarios: regression tables

def underdog_spec(covariates=UNDERDOG_COVARIATES, outcome="performance_underdog",
                  treatments=("ability_ratio",), interactions=()):
    return RegressionSpec(outcome, list(treatments), list(covariates),
                          ["stage", "tournament_year", "underdog_id"],
                          cluster="underdog_id", interactions=list(interactions))


def favorite_spec(covariates=FAVORITE_COVARIATES, outcome="performance_favorite",
                  treatments=("ability_ratio",), interactions=()):
    return RegressionSpec(outcome, list(treatments), list(covariates),
                          ["stage", "tournament_year", "favorite_id"],
                          cluster="favorite_id", interactions=list(interactions))


def _table_payload(results):
    return {key: res.to_dict() for key, res in results.items()}


def _write_table(out, name, results, title):
    write_json(out / f"{name}.json", _table_payload(results))
    text = "\n\n".join(res.summary(f"{title}: {key}")
                       for key, res in results.items())
    (out / f"{name}.txt").write_text(text + "\n", encoding="utf-8")


def run_table2(config, panel=None):
    """Ability-ratio effects on individual performance, three columns."""
    out = _outdir(config)
    panel = panel if panel is not None else _panel_for(config)
    results = {}
    for side, spec_fn, base in (("underdog", underdog_spec, UNDERDOG_COVARIATES),
                                ("favorite", favorite_spec, FAVORITE_COVARIATES)):
        results[f"{side}_col1"] = fe_ols(panel, spec_fn(covariates=[base[0]]))
        results[f"{side}_col2"] = fe_ols(panel, spec_fn(
            covariates=[base[0], "world_ranking_favorite", "world_ranking_underdog"]))
        results[f"{side}_col3"] = fe_ols(panel, spec_fn())
    _write_table(out, "table2", results, "ability ratio on performance")
    planted = config.build_effects()
    summary = {
        "underdog_estimate": results["underdog_col3"]["ability_ratio"],
        "underdog_planted": planted.beta_underdog_ratio,
        "favorite_estimate": results["favorite_col3"]["ability_ratio"],
        "favorite_planted": planted.beta_favorite_ratio,
    }
    write_json(out / "table2_summary.json", summary)
    return results


def run_table3(config, panel=None):
    """Per-half performance responses; the config plants a halves contrast."""
    out = _outdir(config)
    panel = panel if panel is not None else _panel_for(config)
    results = {}
    for half in ("", "_first_half", "_second_half"):
        results[f"underdog{half or '_whole'}"] = fe_ols(
            panel, underdog_spec(outcome=f"performance_underdog{half}"))
        results[f"favorite{half or '_whole'}"] = fe_ols(
            panel, favorite_spec(outcome=f"performance_favorite{half}"))
    _write_table(out, "table3", results, "per-half performance")
    return results


def run_table4(config, panel=None):
    """Contest outcomes: favorite win, length, number of maximum scores."""
    out = _outdir(config)
    panel = panel if panel is not None else _panel_for(config)
    results = {
        "favorite_win": fe_ols(panel, favorite_spec(outcome="favorite_wins")),
        "contest_length": fe_ols(panel, favorite_spec(outcome="contest_length_fraction")),
        "n_180s": fe_ols(panel, favorite_spec(outcome="n_180s")),
    }
    _write_table(out, "table4", results, "contest outcomes")
    return results


def run_table5(config, panel=None):
    """Head-start effects with ability-ratio tercile interactions."""
    out = _outdir(config)
    panel = with_underdog_starts(panel if panel is not None else _panel_for(config))
    covs_no_start = [c for c in UNDERDOG_COVARIATES if c != "favorite_starts"]
    covs_f_no_start = [c for c in FAVORITE_COVARIATES if c != "favorite_starts"]
    results = {
        "panelA_favorite_win": fe_ols(panel, favorite_spec(
            outcome="favorite_wins", treatments=("underdog_starts", "ability_ratio"),
            covariates=covs_f_no_start)),
        "panelA_favorite": fe_ols(panel, favorite_spec(
            treatments=("underdog_starts", "ability_ratio"),
            covariates=covs_f_no_start)),
        "panelA_underdog": fe_ols(panel, underdog_spec(
            treatments=("underdog_starts", "ability_ratio"),
            covariates=covs_no_start)),
        "panelB_underdog": fe_ols(panel, underdog_spec(
            treatments=("ability_ratio",), covariates=covs_no_start,
            interactions=[("underdog_starts", "ability_ratio", 3)])),
    }
    _write_table(out, "table5", results, "underdog head start")
    planted = config.build_effects()
    b = results["panelB_underdog"]
    summary = {
        "main_estimate": results["panelA_underdog"]["underdog_starts"],
        "main_se": results["panelA_underdog"].se_of("underdog_starts"),
        "planted_gamma": planted.gamma_headstart_underdog,
        "terciles": [b["underdog_starts_x_ability_ratio_q1"],
                     b["underdog_starts_x_ability_ratio_q2"],
                     b["underdog_starts_x_ability_ratio_q3"]],
    }
    write_json(out / "table5_summary.json", summary)
    return results


def run_table6(config, panel=None):
    """Next-opponent spillovers: naive OLS next to the scheduling-instrument
    2SLS, with the first stage reported."""
    out = _outdir(config)
    panel = panel if panel is not None else _panel_for(config)
    sub = panel[panel.opponent_known.notna()]
    results = {}
    for side, outcome, cluster in (("favorite", "performance_favorite", "favorite_id"),
                                   ("underdog", "performance_underdog", "underdog_id"),
                                   ("favorite_win", "favorite_wins", "favorite_id")):
        own = ("ability_underdog" if side == "underdog" else "ability_favorite")
        covs = [own, "ability_ratio", "favorite_starts"]
        results[f"ols_{side}"] = fe_ols(sub, RegressionSpec(
            outcome, ["expected_ability_next"], covs,
            ["stage", "tournament_year"], cluster=cluster))
        results[f"tsls_{side}"] = tsls(
            sub, outcome, "expected_ability_next", "opponent_known",
            covariates=covs, fixed_effects=["stage", "tournament_year"],
            cluster=cluster)
    _write_table(out, "table6", results, "next-opponent spillovers")
    planted = config.build_effects()
    iv = results["tsls_favorite"]
    summary = {
        "planted_delta": planted.delta_spillover_favorite,
        "ols_favorite": results["ols_favorite"]["expected_ability_next"],
        "tsls_favorite": iv["expected_ability_next"],
        "tsls_favorite_se": iv.se_of("expected_ability_next"),
        "first_stage": iv.first_stage,
    }
    write_json(out / "table6_summary.json", summary)
    return results


# ---------------------------------------------------------------------------
# scenarios: figures

def dr_curve_for(panel, side, seed, bandwidth="cv", trim_top=DR_TRIM_TOP,
                 marginal_grid=49):
    """Doubly-robust dose-response of one side's outcome on the ratio.

    `side` is "underdog", "favorite", or "favorite_win" (the binary contest
    outcome). Returns (curve, xi_info, data_used). Treatment outliers above
    the (1 - trim_top) quantile are dropped, mirroring the outlier-trimmed
    figures.
    """
    protocol = DR_PROTOCOL[side]
    data = panel
    if trim_top:
        data = panel[panel.ability_ratio
                     <= panel.ability_ratio.quantile(1.0 - trim_top)]
    own = "ability_underdog" if side == "underdog" else "ability_favorite"
    outcome = "favorite_wins" if side == "favorite_win" else f"performance_{side}"
    y = data[outcome].to_numpy(float)
    X = data[[own] + protocol["controls"]].to_numpy(float)
    a = data["ability_ratio"].to_numpy(float)
    mean_model = rf_fit(np.column_stack([X, a]), y, seed=seed,
                        features_per_split=X.shape[1] + 1, **protocol["forest"])
    density = cond_density_fit(a, X, seed=seed + 1, n_trees=150, min_leaf=8)
    xi, info = pseudo_outcome(y, a, X, density, mean_model,
                              marginal_grid=marginal_grid)
    if bandwidth == "cv":
        curve = dose_response(xi, a, seed=seed)
    else:
        curve = dose_response(xi, a, bandwidth=0.5 * float(a.std()),
                              undersmooth=1.0, seed=seed)
    return curve, info, data


def step_effect(curve, step=0.05, span=(0.15, 0.85)):
    """Average slope between inner quantiles of the dose, times `step`."""
    lo, hi = np.quantile(curve.treatment, span)
    return ate_between(curve, hi, lo) * step


def _curve_csv(path, curve):
    table = np.column_stack([curve.grid, curve.estimate, curve.lower, curve.upper])
    np.savetxt(path, table, delimiter=",", comments="",
               header="treatment,estimate,lower90,upper90", fmt="%.10g")


def run_fig2(config):
    """Dose-response curves of individual performance, with the step effect
    averaged over two nuisance seeds per side."""
    out = _outdir(config)
    panel = _panel_for(config)
    payload = {}
    for side in ("underdog", "favorite"):
        curve, info, _ = dr_curve_for(panel, side, config.seed, bandwidth="cv")
        steps = []
        for k in range(2):
            fixed, _, _ = dr_curve_for(panel, side, config.seed + 100 * (k + 1),
                                       bandwidth="fixed")
            steps.append(step_effect(fixed))
        _curve_csv(out / f"fig2_{side}.csv", curve)
        svg.line_chart(
            out / f"fig2_{side}.svg",
            [{"x": curve.grid.tolist(), "y": curve.estimate.tolist(),
              "label": "dose response"},
             {"x": curve.grid.tolist(), "y": curve.lower.tolist(),
              "label": "90% band", "dashed": True},
             {"x": curve.grid.tolist(), "y": curve.upper.tolist(),
              "label": "", "dashed": True}],
            title=f"{side} performance vs ability ratio",
            x_label="ability ratio", y_label="potential outcome",
        )
        payload[side] = {"step_effect_per_0.05": float(np.mean(steps)),
                         "bandwidth": curve.bandwidth.h,
                         "trim_rate": info["trim_rate"]}
    write_json(out / "fig2_summary.json", payload)
    return payload


def run_fig3(config):
    """Win-probability dose-response next to a mechanical-only benchmark.

    The benchmark re-simulates the same configuration with every performance
    response switched off, standing in for an odds-implied line: any excess
    slope of the headline curve over it reflects behavioural responses.
    """
    out = _outdir(config)
    panel = _panel_for(config)
    curve, _, data = dr_curve_for(panel, "favorite_win", config.seed,
                                  bandwidth="fixed")
    mech_effects = TrueEffects.zero()
    mech = run_tournaments(config.build_dgp(), mech_effects, config.seed + 1)
    a_m = mech.ability_ratio.to_numpy(float)
    w_m = mech.favorite_wins.to_numpy(float)
    grid = curve.grid
    h = max(curve.bandwidth.h, 0.01)
    odds = np.array([
        float((kernel_weights((a_m - g) / h, "epanechnikov") @ w_m)
              / max(kernel_weights((a_m - g) / h, "epanechnikov").sum(), 1e-12))
        for g in grid
    ])
    _curve_csv(out / "fig3_win.csv", curve)
    np.savetxt(out / "fig3_mechanical.csv",
               np.column_stack([grid, odds]), delimiter=",", comments="",
               header="treatment,mechanical_win_prob", fmt="%.10g")
    svg.line_chart(
        out / "fig3.svg",
        [{"x": grid.tolist(), "y": curve.estimate.tolist(), "label": "estimated"},
         {"x": grid.tolist(), "y": odds.tolist(), "label": "mechanical only",
          "dashed": True}],
        title="favorite win probability vs ability ratio",
        x_label="ability ratio", y_label="win probability",
    )
    top = curve.estimate[curve.in_support][-5:]
    payload = {"win_prob_at_high_ratio": float(np.nanmean(top)),
               "bandwidth": curve.bandwidth.h}
    write_json(out / "fig3_summary.json", payload)
    return payload


def run_fig4(config):
    """Median splits by experience, ability, and prize money."""
    out = _outdir(config)
    panel = _panel_for(config)
    rows = []
    payload = {}
    split_vars = {"experience": {"underdog": "experience_underdog",
                                 "favorite": "experience_favorite"},
                  "ability": {"underdog": "ability_underdog",
                              "favorite": "ability_favorite"},
                  "prize_money": {"underdog": "prize_money",
                                  "favorite": "prize_money"}}
    outcomes = (("underdog", underdog_spec()),
                ("favorite", favorite_spec()),
                ("favorite_win", favorite_spec(outcome="favorite_wins")))
    for vi, (var, by_side) in enumerate(split_vars.items()):
        for name, spec in outcomes:
            side = "favorite" if name.startswith("favorite") else "underdog"
            low, high = subsample_split(panel, by_side[side])
            for half, data in (("low", low), ("high", high)):
                res = fe_ols(data, spec)
                est = res["ability_ratio"]
                lo, hi = res.conf_int("ability_ratio", level=0.90)
                key = f"{name}.{var}.{half}"
                payload[key] = {"estimate": est, "lower90": lo, "upper90": hi,
                                "n": res.n_obs}
                rows.append((f"{var[:3]}-{half}-{name[:3]}", est, lo, hi, vi))
    svg.whisker_chart(out / "fig4.svg", rows,
                      title="ability-ratio effects in median subsamples",
                      y_label="coefficient (90% CI)")
    write_json(out / "fig4_summary.json", payload)
    return payload


FIG5_PANELS = {
    "baseline": dict(variant=BASELINE, reward_l=1.0, reward_h=1.0),
    "reward_scaled": dict(variant=REWARD_SCALED, reward_multiplier=2.0,
                          reward_h=1.0),
    "reward_theta": dict(variant=REWARD_THETA, alpha=0.2, reward_h=1.0),
    "choking": dict(variant=CHOKING, alpha=0.2, reward_l=1.0, reward_h=1.0),
}


def run_fig5(config, theta_max=2.0, n_points=201):
    """Equilibrium-effort curves for the four contest variants."""
    out = _outdir(config)
    payload = {}
    for name, kw in FIG5_PANELS.items():
        kw = dict(kw)
        variant = kw.pop("variant")
        curve = effort_curve(variant, theta_max=theta_max, n_points=n_points, **kw)
        write_curve_csv(out / f"fig5_{name}.csv", curve)
        svg.line_chart(
            out / f"fig5_{name}.svg",
            [{"x": curve[:, 0].tolist(), "y": curve[:, 1].tolist(),
              "label": "low-ability effort"},
             {"x": curve[:, 0].tolist(), "y": curve[:, 2].tolist(),
              "label": "high-ability effort", "dashed": True}],
            title=f"equilibrium effort: {name}",
            x_label="relative skill of the high player", y_label="effort",
        )
        stats = {
            "e_l_peak_theta": float(curve[np.argmax(curve[:, 1]), 0]),
            "e_h_peak_theta": float(curve[np.argmax(curve[:, 2]), 0]),
        }
        if name == "choking":
            stats["e_h_peak_formula"] = choking_peak_theta(0.2)
        payload[name] = stats
    write_json(out / "fig5_summary.json", payload)
    return payload


def run_placebo(config, n_reps=None):
    """Size of the 5%-level tests when nothing is planted."""
    out = _outdir(config)
    n_reps = n_reps or int(config.estimator.get("n_reps", 100))
    dgp = config.build_dgp()
    zero = TrueEffects.zero()
    rej = {"ability_ratio": 0, "head_start": 0, "spillover": 0}
    covs_no_start = [c for c in UNDERDOG_COVARIATES if c != "favorite_starts"]
    for rep in range(n_reps):
        panel = with_underdog_starts(run_tournaments(dgp, zero, config.seed + rep))
        r1 = fe_ols(panel, underdog_spec())
        rej["ability_ratio"] += r1.pvalue("ability_ratio") < 0.05
        r2 = fe_ols(panel, underdog_spec(
            treatments=("underdog_starts", "ability_ratio"),
            covariates=covs_no_start))
        rej["head_start"] += r2.pvalue("underdog_starts") < 0.05
        sub = panel[panel.opponent_known.notna()]
        r3 = fe_ols(sub, RegressionSpec(
            "performance_favorite", ["expected_ability_next"],
            ["ability_favorite", "ability_ratio", "favorite_starts"],
            ["stage", "tournament_year"], cluster="favorite_id"))
        rej["spillover"] += r3.pvalue("expected_ability_next") < 0.05
    rates = {k: v / n_reps for k, v in rej.items()}
    payload = {"n_reps": n_reps, "rejection_rates": rates,
               "within_band": {k: bool(0.02 <= r <= 0.10)
                               for k, r in rates.items()}}
    write_json(out / "placebo.json", payload)
    return payload


RUNNERS = {
    "calibration": run_calibration,
    "table2": run_table2,
    "table3": run_table3,
    "table4": run_table4,
    "table5": run_table5,
    "table6": run_table6,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "placebo": run_placebo,
}


def run_scenario(config):
    return RUNNERS[config.scenario](config)
