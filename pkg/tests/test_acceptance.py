"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run pytest with -s to see them all) and
asserts the criterion outcome. The same runners back `contestlab reproduce`.
"""

import json

from contestlab import acceptance as acc

SEED = 42


def _run(fn, tmp_path=None, **kw):
    if tmp_path is not None:
        result = fn(seed=SEED, out_dir=tmp_path, **kw)
    else:
        result = fn(seed=SEED, **kw)
    print()
    print(result.line)
    print(json.dumps(result.details, indent=2, default=str)[:800])
    return result


def test_criterion_1_equilibrium_exactness():
    result = _run(acc.criterion_1_equilibria)
    assert result.details["max_abs_foc"] <= 1e-10
    assert result.details["failures"] == 0
    assert result.passed, result.details


def test_criterion_2_effort_curve_shapes():
    result = _run(acc.criterion_2_shapes)
    assert 1.31 <= result.details["choking_peak"] <= 1.34
    assert result.passed, result.details


def test_criterion_3_calibration(tmp_path):
    result = _run(acc.criterion_3_calibration, tmp_path=tmp_path)
    assert result.details["n_contests"] == 4776
    assert result.passed, result.details


def test_criterion_4_ratio_effect_recovery():
    result = _run(acc.criterion_4_ratio_recovery)
    assert result.details["coverage_underdog"] >= 90
    assert result.details["coverage_favorite"] >= 90
    assert result.details["sign_underdog"] >= 95
    assert result.details["sign_favorite"] >= 95
    assert result.passed, result.details


def test_criterion_5_dose_response_fidelity():
    result = _run(acc.criterion_5_dose_response)
    steps = result.details["steps"]
    assert abs(steps["underdog"]["estimate"] - (-0.75)) <= 0.25
    assert abs(steps["favorite"]["estimate"] - 0.25) <= 0.25
    assert result.details["oracle_band_coverage"] >= 0.85
    assert result.passed, result.details


def test_criterion_6_double_robustness():
    result = _run(acc.criterion_6_double_robustness)
    assert result.details["oracle"]["rel_error"] <= 0.10
    assert result.details["mu_corrupted"]["rel_error"] <= 0.10
    assert result.details["pi_corrupted"]["rel_error"] <= 0.10
    assert result.details["both_corrupted"]["rel_error"] > 0.10
    assert result.passed, result.details


def test_criterion_7_iv_recovery():
    result = _run(acc.criterion_7_iv_recovery)
    assert result.details["iv_coverage"] >= 90
    assert result.details["ols_miss"] >= 80
    assert result.details["first_stage_negative"] == result.details["n_reps"]
    assert result.details["first_stage_strong"] == result.details["n_reps"]
    assert result.passed, result.details


def test_criterion_8_head_start():
    result = _run(acc.criterion_8_head_start)
    d = result.details
    assert abs(d["estimate"] - d["planted"]) <= 2 * d["se"]
    assert d["tercile_high"] >= d["tercile_low"]
    assert result.passed, result.details


def test_criterion_9_placebo(tmp_path):
    result = _run(acc.criterion_9_placebo, tmp_path=tmp_path)
    for rate in result.details["rejection_rates"].values():
        assert 0.02 <= rate <= 0.10
    assert result.passed, result.details


def test_criterion_10_determinism(tmp_path):
    result = _run(acc.criterion_10_determinism, tmp_path=tmp_path)
    assert result.details["panel_csv_identical"]
    assert result.details["estimate_json_identical"]
    assert result.passed, result.details
