"""Synthetic knockout-tournament panels with planted, recoverable effects.

A season pool of players with latent per-turn scoring ability enters a
calendar of single-elimination tournaments. Each contest is simulated leg by
leg through the darts engine; the effective scoring means respond linearly to
the pairing's ability ratio, to a head start, and (for the favorite) to the
expected ability of the next-stage opponent, with coefficients held in
``TrueEffects`` so estimators can be checked against known ground truth.

Within every stage, contests run in a random order. The contest that feeds
the same next-stage slot (the twin) is either already finished - in which
case the next opponent is known and ``expected_ability_next`` is the realized
winner's ability - or still pending, in which case it is the twin favorite's
ability. That scheduling coin is the instrument used downstream.
"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .darts import CheckoutTable, _play_leg_batch

ABILITY_CENTER = 95.0


class PanelFormatError(ValueError):
    """A panel file failed schema validation; message carries diagnostics."""


@dataclass(frozen=True)
class TrueEffects:
    """Planted linear responses of per-turn scoring means (points per unit).

    The per-half favorite coefficients are the generator's primitives; the
    whole-contest favorite effect is their average because scheduled halves
    are equally sized. Slope terms are zero by default so the baseline panel
    carries homogeneous effects.
    """

    beta_underdog_ratio: float = -15.075
    beta_favorite_ratio_first_half: float = 5.738
    beta_favorite_ratio_second_half: float = 5.738
    gamma_headstart_underdog: float = 0.688
    gamma_headstart_ratio_slope: float = 0.0
    delta_spillover_favorite: float = -0.563
    spillover_confound_favorite: float = 0.0
    home_boost: float = 0.5
    headstart_prob_underdog: float = 0.481

    @property
    def beta_favorite_ratio(self):
        return 0.5 * (self.beta_favorite_ratio_first_half
                      + self.beta_favorite_ratio_second_half)

    @classmethod
    def zero(cls):
        """All planted responses off; mechanical head-start odds kept."""
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.481)


def default_calendar():
    """Year -> list of bracket sizes; 4,776 contests over 2010-2020.

    Sizes are chosen so that sum(size - 1) is exactly 4,776: ten years of
    eleven 32-brackets, two 16s and one 64, and a shorter final season.
    """
    cal = {year: [64] + [32] * 11 + [16] * 2 for year in range(2010, 2020)}
    cal[2020] = [64, 64] + [32] * 10
    return cal


@dataclass(frozen=True)
class DgpConfig:
    """Generator settings; numeric defaults are calibrated against the
    reference descriptive moments (performance levels, favorite win rate,
    ability-ratio distribution, median darts per leg)."""

    n_players: int = 480
    ability_mean: float = 91.0
    ability_sd: float = 4.4
    ability_walk_sd: float = 0.6
    ability_low: float = 60.0
    ability_high: float = 120.0
    baseline_offset: float = 3.05         # level shift of the scoring mean
    ability_load: float = 0.655           # shrinkage of current form toward the
                                          # pool center (ability is a trailing average)
    per_turn_sd: float = 17.0
    finish_skill_base: float = 0.84
    finish_skill_slope: float = 0.015     # per ability point around the center
    checkout: CheckoutTable = field(default_factory=CheckoutTable)
    k_by_stage: tuple = (9, 9, 11, 11, 11, 13)
    seeded_fraction: float = 0.25         # n_seeded = size * fraction
    noise_sd: float = 5.2                 # idiosyncratic player-contest shock
    player_effect_sd: float = 1.4
    stage_effect_sd: float = 0.3
    tournament_effect_sd: float = 0.7
    ranking_noise_sd: float = 3.0
    entry_softmax_scale: float = 2.5      # ability tilt of tournament entry
    wildcard_frac: float = 0.13           # share of entry slots drawn untilted
    spillover_center: float = 100.0       # centering of next-opponent terms
    n_cities: int = 28
    experience_mean: float = 20.0
    experience_sd: float = 9.0
    calendar: dict = field(default_factory=default_calendar)

    def n_seeded(self, size):
        return max(2, int(size * self.seeded_fraction))


@dataclass
class PlayerState:
    id: int
    ability: float
    world_ranking: float
    experience: float
    home_city: int


PANEL_COLUMNS = [
    "tournament", "year", "tournament_year", "stage", "contest",
    "favorite_id", "underdog_id",
    "ability_favorite", "ability_underdog",
    "ability_ratio", "ability_difference", "log_ability_difference",
    "performance_favorite", "performance_underdog", "performance_mean",
    "performance_favorite_first_half", "performance_favorite_second_half",
    "performance_underdog_first_half", "performance_underdog_second_half",
    "performance_favorite_first6", "performance_underdog_first6",
    "favorite_wins", "contest_length_fraction",
    "n_180s", "n_100plus_favorite", "n_100plus_underdog",
    "n_140plus_favorite", "n_140plus_underdog",
    "favorite_starts", "expected_ability_next", "opponent_known",
    "world_ranking_favorite", "world_ranking_underdog",
    "experience_favorite", "experience_underdog",
    "home_favorite", "home_underdog", "prize_money",
]

# Columns empty on final-stage rows (no next opponent exists).
_SPILLOVER_COLUMNS = ("expected_ability_next", "opponent_known")


def seed_positions(bracket_size):
    """Standard anchor pattern: seed number occupying each slot (1-indexed).

    Built by the usual mirroring recursion, e.g. size 4 -> [1, 4, 2, 3] and
    size 8 -> [1, 8, 4, 5, 2, 7, 3, 6]; seeds 1 and 2 land in opposite halves.
    """
    order = [1]
    size = 1
    while size < bracket_size:
        size *= 2
        order = [x for pair in ((s, size + 1 - s) for s in order) for x in pair]
    return order


def make_draw(players, n_seeded, bracket_size, rng):
    """Assign players to bracket slots; the first n_seeded are the seeds.

    Seeds occupy their standard anchor slots, everyone else is permuted
    uniformly into the remaining slots. When there are fewer players than
    slots, the open slots (byes) face the top seeds in order.
    """
    players = list(players)
    if bracket_size & (bracket_size - 1) or bracket_size < 2:
        raise ValueError("bracket_size must be a power of two")
    if n_seeded > bracket_size // 2:
        raise ValueError("at most half the bracket can be seeded")
    if len(players) > bracket_size:
        raise ValueError("more players than bracket slots")
    if n_seeded > len(players):
        raise ValueError("fewer players than seeds")
    n_byes = bracket_size - len(players)
    if n_byes > n_seeded:
        raise ValueError("each bye must face a seeded player")
    anchors = seed_positions(bracket_size)
    slots = [None] * bracket_size
    for s in range(1, n_seeded + 1):
        slots[anchors.index(s)] = players[s - 1]
    bye_slots = {anchors.index(s) ^ 1 for s in range(1, n_byes + 1)}
    open_slots = [i for i in range(bracket_size)
                  if slots[i] is None and i not in bye_slots]
    rest = list(players[n_seeded:])
    order = rng.permutation(len(rest))
    for slot, j in zip(open_slots, order):
        slots[slot] = rest[j]
    return slots


def schedule_stage(n_contests, rng):
    """Uniform random play order for one stage; returns rank per position."""
    ranks = np.empty(n_contests, dtype=np.int64)
    ranks[rng.permutation(n_contests)] = np.arange(n_contests)
    return ranks


def expected_next_ability(position, order_ranks, pair_abilities, winner_ability,
                          is_final_stage):
    """Next-opponent ability proxy for the contest at ``position``.

    ``pair_abilities[p]`` holds the two participants' abilities of contest p
    (NaN pair for a walkover), ``winner_ability[p]`` the realized winner's
    ability (NaN while pending), ``order_ranks[p]`` its slot in the running
    order (-1 for walkovers, decided before the stage starts).

    Returns (value, opponent_known); raises on final-stage contests, which
    have no next opponent.
    """
    if is_final_stage:
        raise ValueError("final-stage contests have no next opponent")
    twin = position ^ 1
    if order_ranks[twin] < 0 or order_ranks[twin] < order_ranks[position]:
        return float(winner_ability[twin]), 1
    return float(np.nanmax(pair_abilities[twin])), 0


def effort_response(abilities_f, abilities_u, ratio, underdog_starts,
                    expected_next, twin_favorite_ability, has_next_stage,
                    extra_f, extra_u, effects, cfg, rng):
    """Effective per-turn means per player and contest half.

    Baseline is the player's own ability plus a fixed offset; planted linear
    terms in (ratio - 1), the head start, and the next-opponent ability (the
    latter for favorites only) are added on top of the supplied fixed-effect
    sums ``extra_*`` and an idiosyncratic normal shock.
    """
    n = abilities_f.shape[0]
    dev = ratio - 1.0
    eps_f = rng.normal(0.0, cfg.noise_sd, n)
    eps_u = rng.normal(0.0, cfg.noise_sd, n)
    spill = np.where(
        has_next_stage,
        effects.delta_spillover_favorite * (expected_next - cfg.spillover_center)
        + effects.spillover_confound_favorite
        * (twin_favorite_ability - cfg.spillover_center),
        0.0,
    )
    form_f = ABILITY_CENTER + cfg.ability_load * (abilities_f - ABILITY_CENTER)
    form_u = ABILITY_CENTER + cfg.ability_load * (abilities_u - ABILITY_CENTER)
    base_f = form_f + cfg.baseline_offset + spill + extra_f + eps_f
    gamma = (effects.gamma_headstart_underdog
             + effects.gamma_headstart_ratio_slope * (ratio - 1.055))
    base_u = (form_u + cfg.baseline_offset
              + effects.beta_underdog_ratio * dev
              + gamma * underdog_starts
              + extra_u + eps_u)
    mean_f_h1 = base_f + effects.beta_favorite_ratio_first_half * dev
    mean_f_h2 = base_f + effects.beta_favorite_ratio_second_half * dev
    return mean_f_h1, mean_f_h2, base_u, base_u


def _finish_skill(ability, cfg):
    return np.clip(
        cfg.finish_skill_base + cfg.finish_skill_slope * (ability - ABILITY_CENTER),
        0.2, 1.0,
    )


def _run_contest_block(mean_f_h1, mean_f_h2, mean_u_h1, mean_u_h2, sd, skill_f,
                       skill_u, k, favorite_starts, rng, checkout):
    """Play a block of best-of-k contests, all legs of a round batched.

    The generator's half split is the scheduled one: legs 1..(k+1)/2 use the
    first-half means. Recorded half performances follow the realized split
    (first ceil(L/2) legs) to match how panels are analysed.
    """
    n = mean_f_h1.shape[0]
    k = np.asarray(k)
    need = (k + 1) // 2
    kmax = int(k.max())
    wins_f = np.zeros(n, dtype=np.int64)
    wins_u = np.zeros(n, dtype=np.int64)
    f9_f = np.full((n, kmax), np.nan)
    f9_u = np.full((n, kmax), np.nan)
    f6_f = np.full((n, kmax), np.nan)
    f6_u = np.full((n, kmax), np.nan)
    cnt = {name: np.zeros((n, kmax)) for name in
           ("n100_f", "n100_u", "n140_f", "n140_u", "n180_f", "n180_u")}
    winner_darts = np.full((n, kmax), np.nan)
    legs_played = np.zeros(n, dtype=np.int64)

    leg_round = 0
    active = np.ones(n, dtype=bool)
    while active.any():
        leg_round += 1
        idx = np.flatnonzero(active)
        first_half = leg_round <= need[idx]
        m_f = np.where(first_half, mean_f_h1[idx], mean_f_h2[idx])
        m_u = np.where(first_half, mean_u_h1[idx], mean_u_h2[idx])
        fav_starts_leg = favorite_starts[idx] ^ (leg_round % 2 == 0)
        mean_a = np.where(fav_starts_leg, m_f, m_u)
        mean_b = np.where(fav_starts_leg, m_u, m_f)
        sd_a = sd[idx]
        skill_a = np.where(fav_starts_leg, skill_f[idx], skill_u[idx])
        skill_b = np.where(fav_starts_leg, skill_u[idx], skill_f[idx])
        res = _play_leg_batch(mean_a, sd_a, skill_a, mean_b, sd_a, skill_b,
                              rng, checkout)
        fav_won = res["winner_is_a"] == fav_starts_leg
        col = leg_round - 1
        f9_f[idx, col] = np.where(fav_starts_leg, res["first9_avg_a"], res["first9_avg_b"])
        f9_u[idx, col] = np.where(fav_starts_leg, res["first9_avg_b"], res["first9_avg_a"])
        f6_f[idx, col] = np.where(fav_starts_leg, res["first6_avg_a"], res["first6_avg_b"])
        f6_u[idx, col] = np.where(fav_starts_leg, res["first6_avg_b"], res["first6_avg_a"])
        for stat in ("n100", "n140", "n180"):
            cnt[stat + "_f"][idx, col] = np.where(
                fav_starts_leg, res[stat + "_a"], res[stat + "_b"])
            cnt[stat + "_u"][idx, col] = np.where(
                fav_starts_leg, res[stat + "_b"], res[stat + "_a"])
        winner_darts[idx, col] = 3 * res["winner_turns"]
        wins_f[idx] += fav_won
        wins_u[idx] += ~fav_won
        legs_played[idx] += 1
        active[idx] = (wins_f[idx] < need[idx]) & (wins_u[idx] < need[idx])

    n_first = (legs_played + 1) // 2
    cols = np.arange(kmax)
    in_first = cols[None, :] < n_first[:, None]
    played = cols[None, :] < legs_played[:, None]

    def _mean_over(values, mask):
        total = np.where(mask, values, 0.0).sum(axis=1)
        count = mask.sum(axis=1)
        return np.divide(total, count, out=np.full(total.shape, np.nan),
                         where=count > 0)

    out = {
        "favorite_wins": (wins_f > wins_u).astype(np.int64),
        "legs_played": legs_played,
        "contest_length_fraction": legs_played / k,
        "performance_favorite": _mean_over(f9_f, played),
        "performance_underdog": _mean_over(f9_u, played),
        "performance_favorite_first_half": _mean_over(f9_f, played & in_first),
        "performance_favorite_second_half": _mean_over(f9_f, played & ~in_first),
        "performance_underdog_first_half": _mean_over(f9_u, played & in_first),
        "performance_underdog_second_half": _mean_over(f9_u, played & ~in_first),
        "performance_favorite_first6": _mean_over(f6_f, played),
        "performance_underdog_first6": _mean_over(f6_u, played),
        "n_180s": np.where(played, cnt["n180_f"] + cnt["n180_u"], 0.0).sum(axis=1),
        "n_100plus_favorite": _mean_over(cnt["n100_f"], played),
        "n_100plus_underdog": _mean_over(cnt["n100_u"], played),
        "n_140plus_favorite": _mean_over(cnt["n140_f"], played),
        "n_140plus_underdog": _mean_over(cnt["n140_u"], played),
        "winner_darts": winner_darts,
        "played_mask": played,
    }
    return out


def _season_pool(cfg, rng):
    abilities = np.clip(
        rng.normal(cfg.ability_mean, cfg.ability_sd, cfg.n_players),
        cfg.ability_low, cfg.ability_high,
    )
    experience = np.clip(
        rng.normal(cfg.experience_mean, cfg.experience_sd, cfg.n_players), 1.0, 45.0)
    cities = rng.integers(0, cfg.n_cities, cfg.n_players)
    return abilities, experience, cities


def _rankings(abilities, cfg, rng):
    noisy = abilities + rng.normal(0.0, cfg.ranking_noise_sd, abilities.shape[0])
    ranks = np.empty(abilities.shape[0], dtype=np.int64)
    ranks[np.argsort(-noisy, kind="stable")] = np.arange(abilities.shape[0])
    return ranks / (abilities.shape[0] - 1)


class _TournamentState:
    """Mutable bracket state while a tournament is in play."""

    __slots__ = ("series", "year", "prize", "city", "effect", "current", "stage")

    def __init__(self, series, year, prize, city, effect, slots):
        self.series = series
        self.year = year
        self.prize = prize
        self.city = city
        self.effect = effect
        self.current = list(slots)
        self.stage = 0


def run_tournaments(cfg, effects, master_seed, diagnostics=False):
    """Simulate the whole calendar and return the contest panel.

    Deterministic given (cfg, effects, master_seed). All tournaments advance
    stage-synchronously so their legs batch into a handful of vectorised
    kernel calls per stage. With diagnostics=True also returns leg-level
    darts counts for calibration checks.
    """
    rng = np.random.default_rng(np.random.SeedSequence(master_seed))
    abilities, experience, cities = _season_pool(cfg, rng)
    player_effect = rng.normal(0.0, cfg.player_effect_sd, cfg.n_players)
    stage_effect = rng.normal(0.0, cfg.stage_effect_sd, len(cfg.k_by_stage))
    series_city = {}
    states = []
    year_ability = {}
    year_ranking = {}
    year_experience = {}

    for year in sorted(cfg.calendar):
        previous = abilities.copy()
        if year != sorted(cfg.calendar)[0]:
            abilities = np.clip(
                abilities + rng.normal(0.0, cfg.ability_walk_sd, cfg.n_players),
                cfg.ability_low, cfg.ability_high,
            )
            experience = experience + 1.0
        # The ranking list is struck at the end of the previous season.
        ranking = _rankings(previous, cfg, rng)
        year_ability[year] = abilities.copy()
        year_ranking[year] = ranking
        # Self-reported years of practice wobble a little between seasons.
        year_experience[year] = experience + rng.normal(0.0, 0.5, cfg.n_players)
        sizes = cfg.calendar[year]
        brackets = np.array([s[0] if isinstance(s, (tuple, list)) else s
                             for s in sizes], dtype=float)
        prize_raw = rng.lognormal(0.0, 0.8, len(sizes)) * np.sqrt(brackets)
        lo, hi = prize_raw.min(), prize_raw.max()
        prize = (prize_raw - lo) / (hi - lo) if hi > lo else np.zeros_like(prize_raw)

        for t_idx, size in enumerate(sizes):
            # A calendar entry may be (bracket_size, n_entrants); short fields
            # give the top seeds first-stage byes.
            bracket, n_entrants = (size if isinstance(size, (tuple, list))
                                   else (size, size))
            if t_idx not in series_city:
                series_city[t_idx] = int(rng.integers(0, cfg.n_cities))
            tourn_eff = float(rng.normal(0.0, cfg.tournament_effect_sd))
            weights = np.exp((abilities - abilities.max()) / cfg.entry_softmax_scale)
            p = ((1.0 - cfg.wildcard_frac) * weights / weights.sum()
                 + cfg.wildcard_frac / cfg.n_players)
            entrants = rng.choice(cfg.n_players, size=n_entrants, replace=False, p=p)
            entrants = entrants[np.argsort(ranking[entrants], kind="stable")]
            slots = make_draw(entrants.tolist(), cfg.n_seeded(bracket), bracket, rng)
            states.append(_TournamentState(t_idx, year, float(prize[t_idx]),
                                           series_city[t_idx], tourn_eff, slots))

    records = []
    darts_all = []
    stage = 0
    while any(len(st.current) > 1 for st in states):
        stage += 1
        live = [st for st in states if len(st.current) > 1]
        stage_rows = []           # one entry per real contest, all tournaments
        per_state = {}            # id(state) -> (pairs, order, pair_ab, winner_ab, winners)
        for st in live:
            st.stage = stage
            n_pos = len(st.current) // 2
            pairs = [(st.current[2 * p], st.current[2 * p + 1]) for p in range(n_pos)]
            real = [p for p, (i, j) in enumerate(pairs)
                    if i is not None and j is not None]
            order_ranks = np.full(n_pos, -1, dtype=np.int64)
            if real:
                order_ranks[real] = schedule_stage(len(real), rng)
            pair_ab = np.full((n_pos, 2), np.nan)
            winner_ab = np.full(n_pos, np.nan)
            winners = [None] * n_pos
            ab = year_ability[st.year]
            for p, (i, j) in enumerate(pairs):
                if i is not None and j is not None:
                    pair_ab[p] = (ab[i], ab[j])
                elif i is not None or j is not None:
                    w = i if i is not None else j
                    winners[p] = w
                    winner_ab[p] = ab[w]
            per_state[id(st)] = (pairs, order_ranks, pair_ab, winner_ab, winners)
            for p in real:
                twin = p ^ 1
                first = bool(twin not in real or order_ranks[p] < order_ranks[twin])
                stage_rows.append((st, p, first))

        for wave in (True, False):
            rows = [(st, p) for st, p, first in stage_rows if first == wave]
            if rows:
                _play_pooled(rows, per_state, stage, year_ability, year_ranking,
                             year_experience, cities, player_effect, stage_effect,
                             cfg, effects, rng, records, darts_all)

        for st in live:
            st.current = per_state[id(st)][4]

    panel = pd.DataFrame.from_records(records, columns=PANEL_COLUMNS)
    panel = panel.sort_values(["year", "tournament", "stage", "contest"],
                              kind="stable").reset_index(drop=True)
    if diagnostics:
        return panel, {"darts_per_leg": np.concatenate(darts_all)}
    return panel


def _play_pooled(rows, per_state, stage, year_ability, year_ranking,
                 year_experience, cities, player_effect, stage_effect, cfg,
                 effects, rng, records, darts_all):
    m = len(rows)
    fav = np.empty(m, dtype=np.int64)
    und = np.empty(m, dtype=np.int64)
    expected = np.full(m, np.nan)
    known = np.zeros(m, dtype=np.int64)
    twin_fav_ability = np.full(m, np.nan)
    is_final = np.zeros(m, dtype=bool)
    extra_base = np.empty(m)
    home_f = np.empty(m, dtype=np.int64)
    home_u = np.empty(m, dtype=np.int64)
    ability_f = np.empty(m)
    ability_u = np.empty(m)

    for row, (st, p) in enumerate(rows):
        pairs, order_ranks, pair_ab, winner_ab, _ = per_state[id(st)]
        ab = year_ability[st.year]
        i, j = pairs[p]
        f, u = (i, j) if ab[i] >= ab[j] else (j, i)
        fav[row], und[row] = f, u
        ability_f[row], ability_u[row] = ab[f], ab[u]
        final = len(pairs) == 1
        is_final[row] = final
        if not final:
            expected[row], known[row] = expected_next_ability(
                p, order_ranks, pair_ab, winner_ab, final)
            twin = p ^ 1
            twin_fav_ability[row] = (np.nanmax(pair_ab[twin])
                                     if order_ranks[twin] >= 0 else winner_ab[twin])
        home_f[row] = cities[f] == st.city
        home_u[row] = cities[u] == st.city
        extra_base[row] = st.effect

    ratio = ability_f / ability_u
    und_starts = (rng.random(m) < effects.headstart_prob_underdog).astype(np.int64)
    stage_eff = stage_effect[min(stage, len(cfg.k_by_stage)) - 1]
    extra_f = (player_effect[fav] + stage_eff + extra_base
               + effects.home_boost * home_f)
    extra_u = (player_effect[und] + stage_eff + extra_base
               + effects.home_boost * home_u)

    mean_f_h1, mean_f_h2, mean_u_h1, mean_u_h2 = effort_response(
        ability_f, ability_u, ratio, und_starts, expected, twin_fav_ability,
        ~is_final, extra_f, extra_u, effects, cfg, rng)

    k = np.full(m, cfg.k_by_stage[min(stage, len(cfg.k_by_stage)) - 1])
    res = _run_contest_block(
        mean_f_h1, mean_f_h2, mean_u_h1, mean_u_h2,
        np.full(m, cfg.per_turn_sd),
        _finish_skill(ability_f, cfg), _finish_skill(ability_u, cfg),
        k, und_starts == 0, rng, cfg.checkout,
    )
    darts_all.append(res["winner_darts"][res["played_mask"]])

    for row, (st, p) in enumerate(rows):
        pairs, order_ranks, pair_ab, winner_ab, winners = per_state[id(st)]
        ranking = year_ranking[st.year]
        experience = year_experience[st.year]
        won = bool(res["favorite_wins"][row])
        winners[p] = int(fav[row]) if won else int(und[row])
        winner_ab[p] = year_ability[st.year][winners[p]]
        final = is_final[row]
        rec = {
            "tournament": st.series, "year": st.year,
            "tournament_year": st.series * 10000 + st.year,
            "stage": stage, "contest": int(order_ranks[p]),
            "favorite_id": int(fav[row]), "underdog_id": int(und[row]),
            "ability_favorite": float(ability_f[row]),
            "ability_underdog": float(ability_u[row]),
            "ability_ratio": float(ratio[row]),
            "ability_difference": float(ability_f[row] - ability_u[row]),
            "log_ability_difference": float(np.log(ability_f[row])
                                            - np.log(ability_u[row])),
            "favorite_wins": int(won),
            "favorite_starts": int(1 - und_starts[row]),
            "expected_ability_next": np.nan if final else float(expected[row]),
            "opponent_known": np.nan if final else int(known[row]),
            "world_ranking_favorite": float(ranking[fav[row]]),
            "world_ranking_underdog": float(ranking[und[row]]),
            "experience_favorite": float(experience[fav[row]]),
            "experience_underdog": float(experience[und[row]]),
            "home_favorite": int(home_f[row]), "home_underdog": int(home_u[row]),
            "prize_money": float(st.prize),
        }
        for name in ("performance_favorite", "performance_underdog",
                     "performance_favorite_first_half", "performance_favorite_second_half",
                     "performance_underdog_first_half", "performance_underdog_second_half",
                     "performance_favorite_first6", "performance_underdog_first6",
                     "contest_length_fraction", "n_180s",
                     "n_100plus_favorite", "n_100plus_underdog",
                     "n_140plus_favorite", "n_140plus_underdog"):
            rec[name] = float(res[name][row])
        rec["performance_mean"] = 0.5 * (rec["performance_favorite"]
                                         + rec["performance_underdog"])
        records.append(rec)


def export_panel(panel, path):
    """Write the panel as UTF-8 CSV with the fixed column order.

    Booleans are 0/1 and final-stage spillover fields are empty cells; float
    round-trip through the shortest repr is exact.
    """
    missing = [c for c in PANEL_COLUMNS if c not in panel.columns]
    if missing:
        raise PanelFormatError(f"panel lacks required columns: {missing}")
    panel[PANEL_COLUMNS].to_csv(path, index=False, float_format=None)


def import_panel(path):
    """Read a panel CSV back, validating schema and numeric cells."""
    try:
        raw = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise PanelFormatError(f"cannot parse panel file {path}: {exc}") from exc
    missing = [c for c in PANEL_COLUMNS if c not in raw.columns]
    if missing:
        raise PanelFormatError(f"missing required column(s): {missing}")
    for col in PANEL_COLUMNS:
        coerced = pd.to_numeric(raw[col], errors="coerce")
        bad = coerced.isna() & raw[col].notna()
        if bad.any():
            row = int(bad.idxmax())
            raise PanelFormatError(
                f"non-numeric value in column {col!r} at row {row}: {raw[col][row]!r}")
        raw[col] = coerced
    return raw[PANEL_COLUMNS]
