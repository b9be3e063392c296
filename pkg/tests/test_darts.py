import numpy as np
import pytest

from contestlab.darts import (
    DEFAULT_CHECKOUT, CheckoutTable, ThrowerProfile, bull_off,
    simulate_contest, simulate_leg, simulate_turn, _play_leg_batch,
)

CERTAIN = CheckoutTable(1.0, 1.0, 1.0)


def profile(mean=98.0, sd=17.0, skill=0.9):
    return ThrowerProfile(mean, sd, skill)


class TestProfiles:
    def test_validation(self):
        with pytest.raises(ValueError):
            ThrowerProfile(0.0, 10.0)
        with pytest.raises(ValueError):
            ThrowerProfile(200.0, 10.0)
        with pytest.raises(ValueError):
            ThrowerProfile(100.0, 0.0)
        with pytest.raises(ValueError):
            ThrowerProfile(100.0, 10.0, 0.0)


class TestSimulateTurn:
    def test_degenerate_noise(self):
        rng = np.random.default_rng(0)
        p = ThrowerProfile(100.0, 1e-9, 1.0)
        assert simulate_turn(p, 501, rng) == 100

    def test_forced_checkout(self):
        rng = np.random.default_rng(0)
        p = ThrowerProfile(100.0, 20.0, 1.0)
        assert simulate_turn(p, 40, rng, checkout=CERTAIN) == 40

    def test_range_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            simulate_turn(profile(), 1, rng)
        with pytest.raises(ValueError):
            simulate_turn(profile(), 502, rng)

    def test_empirical_mean_matches_generator(self):
        rng = np.random.default_rng(5)
        p = ThrowerProfile(100.0, 25.0, 0.9)
        draws = [simulate_turn(p, 501, rng) for _ in range(100_000)]
        assert np.mean(draws) == pytest.approx(100.0, abs=0.5)

    def test_never_overshoots(self):
        rng = np.random.default_rng(6)
        p = ThrowerProfile(120.0, 40.0, 0.3)
        for remaining in (2, 3, 50, 170, 300):
            for _ in range(200):
                score = simulate_turn(p, remaining, rng)
                assert 0 <= score <= 180
                assert score == remaining or score <= remaining - 2


class TestSimulateLeg:
    def test_nine_dart_leg(self):
        rng = np.random.default_rng(0)
        p = ThrowerProfile(167.0, 1e-9, 1.0)
        leg = simulate_leg(p, p, "l", rng, checkout=CERTAIN)
        assert leg.winner == "l"
        assert leg.darts_used_by_winner == 9
        assert sum(leg.turns_l) == 501
        assert leg.turns_l == [167, 167, 167]
        assert len(leg.turns_h) == 2

    def test_winner_sums_exactly_501(self):
        rng = np.random.default_rng(1)
        for _ in range(400):
            leg = simulate_leg(profile(), profile(102.0), "h", rng)
            winner_turns = leg.turns_l if leg.winner == "l" else leg.turns_h
            loser_turns = leg.turns_h if leg.winner == "l" else leg.turns_l
            assert sum(winner_turns) == 501
            assert sum(loser_turns) < 501
            assert all(0 <= s <= 180 for s in winner_turns + loser_turns)
            assert leg.darts_used_by_winner >= 9

    def test_starter_advantage(self):
        rng = np.random.default_rng(2)
        p = profile()
        n = 20_000
        res = _play_leg_batch(
            np.full(n, p.per_turn_mean), np.full(n, p.per_turn_sd),
            np.full(n, p.finish_skill),
            np.full(n, p.per_turn_mean), np.full(n, p.per_turn_sd),
            np.full(n, p.finish_skill), rng)
        assert res["winner_is_a"].mean() > 0.5

    def test_first9_uses_turns_thrown(self):
        rng = np.random.default_rng(3)
        p = ThrowerProfile(167.0, 1e-9, 1.0)
        leg = simulate_leg(p, p, "l", rng, checkout=CERTAIN)
        # loser threw two turns only
        assert leg.first9_avg_h == pytest.approx(167.0)

    def test_first9_equals_mean_when_noiseless(self):
        rng = np.random.default_rng(4)
        p = ThrowerProfile(90.0, 1e-9, 1.0)
        leg = simulate_leg(p, p, "l", rng)
        assert leg.first9_avg_l == pytest.approx(90.0)
        assert leg.first9_avg_h == pytest.approx(90.0)

    def test_leg_terminates_with_weak_finishers(self):
        rng = np.random.default_rng(5)
        p = ThrowerProfile(60.0, 30.0, 0.05)
        weak_table = CheckoutTable(0.02, 0.02, 0.01)
        for _ in range(30):
            leg = simulate_leg(p, p, "l", rng, checkout=weak_table)
            winner_turns = leg.turns_l if leg.winner == "l" else leg.turns_h
            assert sum(winner_turns) == 501

    def test_median_darts_for_calibrated_profiles(self):
        rng = np.random.default_rng(6)
        n = 8000
        res = _play_leg_batch(
            np.full(n, 101.0), np.full(n, 17.0), np.full(n, 0.93),
            np.full(n, 97.0), np.full(n, 17.0), np.full(n, 0.88),
            rng, DEFAULT_CHECKOUT)
        median = np.median(3 * res["winner_turns"])
        assert 13 <= median <= 17


class TestSimulateContest:
    def test_k_one_equals_single_leg(self):
        rng = np.random.default_rng(0)
        res = simulate_contest(profile(), profile(103.0), 1, "l", rng)
        assert len(res.legs) == 1
        assert res.legs_won_l + res.legs_won_h == 1
        assert res.contest_length_fraction == 1.0

    def test_even_k_rejected(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            simulate_contest(profile(), profile(), 4, "l", rng)

    def test_sweep_by_degenerate_player(self):
        rng = np.random.default_rng(1)
        fast = ThrowerProfile(167.0, 1e-9, 1.0)
        slow = ThrowerProfile(60.0, 1e-9, 1.0)
        res = simulate_contest(slow, fast, 7, "h", rng, checkout=CERTAIN)
        assert res.winner == "h"
        assert res.legs_won_h == 4 and res.legs_won_l == 0
        assert res.contest_length_fraction == pytest.approx(4 / 7)

    def test_winner_needs_majority(self):
        rng = np.random.default_rng(2)
        for k in (3, 7, 11):
            res = simulate_contest(profile(), profile(100.0), k, "l", rng)
            assert max(res.legs_won_l, res.legs_won_h) == (k + 1) // 2
            assert (k + 1) / (2 * k) <= res.contest_length_fraction <= 1.0

    def test_contest_starter_advantage(self):
        rng = np.random.default_rng(3)
        p = profile()
        wins = 0
        n = 4000
        for _ in range(n):
            res = simulate_contest(p, p, 11, "l", rng)
            wins += res.winner == "l"
        assert wins / n > 0.5

    def test_determinism(self):
        p1, p2 = profile(), profile(101.0)
        a = simulate_contest(p1, p2, 9, "l", np.random.default_rng(99))
        b = simulate_contest(p1, p2, 9, "l", np.random.default_rng(99))
        assert a == b

    def test_half_split(self):
        rng = np.random.default_rng(4)
        res = simulate_contest(profile(), profile(101.0), 9, "l", rng)
        n = len(res.legs)
        first = [leg.first9_avg_l for leg in res.legs[: (n + 1) // 2]]
        assert res.performance_l_first_half == pytest.approx(np.mean(first))


class TestBullOff:
    def test_fair_coin(self):
        rng = np.random.default_rng(0)
        draws = [bull_off(rng) for _ in range(100_000)]
        assert np.mean([d == "l" for d in draws]) == pytest.approx(0.5, abs=0.01)

    def test_certain_override(self):
        rng = np.random.default_rng(1)
        assert all(bull_off(rng, advantaged="l", prob=1.0) == "l"
                   for _ in range(100))

    def test_configured_probability(self):
        rng = np.random.default_rng(2)
        draws = [bull_off(rng, advantaged="l", prob=0.481) for _ in range(100_000)]
        assert np.mean([d == "l" for d in draws]) == pytest.approx(0.481, abs=0.01)
