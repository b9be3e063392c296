"""Two-player ability-weighted (Tullock) contests.

The low-ability player's skill is normalised to 1 and ``theta_h >= 1`` is the
high player's relative skill, so the logit success function reads

    p_h = theta_h * e_h / (e_l + theta_h * e_h),    p_l = 1 - p_h.

Four variants are supported, differing in rewards and effort costs:

* ``baseline``          both players pay linear cost e_i and win R_i
* ``reward_scaled``     R_l = a * R_h  (the low player values winning a times more)
* ``reward_theta``      R_l = theta_h**alpha * R_h (the premium grows with the gap)
* ``choking``           the high player's marginal cost is theta_h**(-alpha)

Every variant has a closed-form Nash equilibrium (see ``equilibrium``); the
grid-search oracles exist so the closed forms are never trusted on faith.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

BASELINE = "baseline"
REWARD_SCALED = "reward_scaled"
REWARD_THETA = "reward_theta"
CHOKING = "choking"


class Variant(str, Enum):
    baseline = BASELINE
    reward_scaled = REWARD_SCALED
    reward_theta = REWARD_THETA
    choking = CHOKING


class ConvergenceError(RuntimeError):
    """Iterated best response failed to settle; carries the last iterate."""

    def __init__(self, message, last_iterate):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class ContestSpec:
    """Concrete parameterisation of one contest.

    ``reward_l`` is stored explicitly even for the derived-reward variants;
    use the factory constructors to build it from (a, alpha, theta_h).
    """

    variant: str
    theta_h: float
    reward_l: float
    reward_h: float
    alpha: float = 0.0

    def __post_init__(self):
        if self.variant not in (BASELINE, REWARD_SCALED, REWARD_THETA, CHOKING):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.theta_h >= 1.0:
            raise ValueError(f"theta_h must be >= 1, got {self.theta_h}")
        if not (self.reward_l > 0.0 and self.reward_h > 0.0):
            raise ValueError("rewards must be strictly positive")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    @classmethod
    def baseline(cls, theta_h, reward_l=1.0, reward_h=1.0):
        return cls(BASELINE, theta_h, reward_l, reward_h)

    @classmethod
    def reward_scaled(cls, theta_h, multiplier, reward_h=1.0):
        if multiplier <= 0:
            raise ValueError("reward multiplier must be positive")
        return cls(REWARD_SCALED, theta_h, multiplier * reward_h, reward_h)

    @classmethod
    def reward_theta(cls, theta_h, alpha, reward_h=1.0):
        return cls(REWARD_THETA, theta_h, theta_h**alpha * reward_h, reward_h, alpha)

    @classmethod
    def choking(cls, theta_h, alpha, reward_l=1.0, reward_h=1.0):
        return cls(CHOKING, theta_h, reward_l, reward_h, alpha)

    @property
    def cost_coef_h(self):
        """Marginal effort cost of the high player (1 except under choking)."""
        if self.variant == CHOKING:
            return self.theta_h ** (-self.alpha)
        return 1.0


@dataclass(frozen=True)
class EffortPair:
    effort_l: float
    effort_h: float
    win_prob_l: float
    win_prob_h: float


def win_probability(spec, effort_l, effort_h):
    """Success probabilities (p_l, p_h) at the given efforts.

    Both efforts zero is resolved as a fair coin (0.5, 0.5) so that Monte
    Carlo draws never divide by zero.
    """
    if effort_l < 0 or effort_h < 0:
        raise ValueError("efforts must be non-negative")
    total = effort_l + spec.theta_h * effort_h
    if total == 0.0:
        return 0.5, 0.5
    p_h = spec.theta_h * effort_h / total
    return 1.0 - p_h, p_h


def equilibrium(spec):
    """Closed-form Nash equilibrium efforts and win probabilities.

    Baseline form (also used by the derived-reward variants, whose reward_l
    was already concretised by the factory):

        e_l* = th * Rl^2 * Rh / (Rl + th*Rh)^2
        e_h* = th * Rl * Rh^2 / (Rl + th*Rh)^2

    Choking replaces th by t = th**(alpha+1) in the denominator and picks up
    an extra th**alpha on e_h:

        e_l* = t * Rh * Rl^2 / (Rl + t*Rh)^2
        e_h* = th**alpha * t * Rl * Rh^2 / (Rl + t*Rh)^2
    """
    th, rl, rh = spec.theta_h, spec.reward_l, spec.reward_h
    if spec.variant == CHOKING:
        t = th ** (spec.alpha + 1.0)
        den = (rl + t * rh) ** 2
        e_l = t * rh * rl**2 / den
        e_h = th**spec.alpha * t * rl * rh**2 / den
    else:
        den = (rl + th * rh) ** 2
        e_l = th * rl**2 * rh / den
        e_h = th * rl * rh**2 / den
    p_l, p_h = win_probability(spec, e_l, e_h)
    return EffortPair(e_l, e_h, p_l, p_h)


def foc_residuals(spec, effort_l, effort_h):
    """First-order-condition residuals (r_l, r_h) at strictly positive efforts.

    r_l = th*e_h*Rl / S^2 - 1 and r_h = th*e_l*Rh / S^2 - c_h with
    S = e_l + th*e_h and c_h the high player's marginal cost. Both vanish at
    the analytic equilibrium.
    """
    if effort_l <= 0 or effort_h <= 0:
        raise ValueError("FOC residuals require strictly positive efforts")
    th = spec.theta_h
    s2 = (effort_l + th * effort_h) ** 2
    r_l = th * effort_h * spec.reward_l / s2 - 1.0
    r_h = th * effort_l * spec.reward_h / s2 - spec.cost_coef_h
    return r_l, r_h


def payoff(spec, which, own_effort, opponent_effort):
    """Expected payoff p_i * R_i - cost_i(e_i) for player ``which``."""
    if which == "l":
        p_l, _ = win_probability(spec, own_effort, opponent_effort)
        return p_l * spec.reward_l - own_effort
    if which == "h":
        _, p_h = win_probability(spec, opponent_effort, own_effort)
        return p_h * spec.reward_h - spec.cost_coef_h * own_effort
    raise ValueError("which must be 'l' or 'h'")


def default_grid(spec, n=20001):
    """Effort grid [0, 2*max(R_l, R_h)] used by the oracles."""
    return np.linspace(0.0, 2.0 * max(spec.reward_l, spec.reward_h), n)


def best_response_oracle(spec, opponent_effort, which, grid):
    """Grid point maximising the player's payoff against a fixed opponent."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("effort grid is empty")
    if opponent_effort < 0:
        raise ValueError("opponent effort must be non-negative")
    th = spec.theta_h
    if which == "l":
        own, opp_w = grid, th * opponent_effort
        total = own + opp_w
        p = np.where(total > 0, np.divide(own, total, out=np.full_like(own, 0.5), where=total > 0), 0.5)
        pay = p * spec.reward_l - grid
    elif which == "h":
        own_w = th * grid
        total = opponent_effort + own_w
        p = np.where(total > 0, np.divide(own_w, total, out=np.full_like(grid, 0.5), where=total > 0), 0.5)
        pay = p * spec.reward_h - spec.cost_coef_h * grid
    else:
        raise ValueError("which must be 'l' or 'h'")
    return float(grid[int(np.argmax(pay))])


def nash_oracle(spec, grid=None, max_iter=4000, damping=0.5):
    """Damped iterated best response on a grid until a mutual fixed point.

    The iterate counts as settled when both players' grid best responses sit
    within one grid step of it; a short streak of settled iterations ends the
    search (the pure best-response map cycles across neighbouring grid points
    forever). When the orbit fails to settle, the damping is halved - strong
    reward asymmetry makes the undamped map expansive.

    Returns the grid equilibrium as an EffortPair; raises ConvergenceError
    (carrying the last iterate) if the cap is hit. Agreement with
    ``equilibrium`` within one grid step is checked by the test suite, not
    assumed here.
    """
    if grid is None:
        grid = default_grid(spec)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ValueError("effort grid needs at least two points")
    step = float(grid[1] - grid[0])
    e_l = e_h = float(grid[grid.size // 2])
    streak = 0
    for it in range(max_iter):
        b_l = best_response_oracle(spec, e_h, "l", grid)
        b_h = best_response_oracle(spec, e_l, "h", grid)
        streak = streak + 1 if max(abs(b_l - e_l), abs(b_h - e_h)) <= step else 0
        e_l = damping * b_l + (1.0 - damping) * e_l
        e_h = damping * b_h + (1.0 - damping) * e_h
        if streak >= 20:
            snap_l = float(grid[int(round((e_l - grid[0]) / step))])
            snap_h = float(grid[int(round((e_h - grid[0]) / step))])
            p_l, p_h = win_probability(spec, snap_l, snap_h)
            return EffortPair(snap_l, snap_h, p_l, p_h)
        if (it + 1) % 500 == 0:
            damping *= 0.5
    raise ConvergenceError(
        f"no fixed point within {max_iter} iterations", (e_l, e_h)
    )


def spec_at(variant, theta_h, alpha=0.0, reward_multiplier=1.0, reward_l=None, reward_h=1.0):
    """Build the concrete spec for one theta along a comparative-statics curve."""
    if variant == BASELINE:
        return ContestSpec.baseline(theta_h, reward_h if reward_l is None else reward_l, reward_h)
    if variant == REWARD_SCALED:
        return ContestSpec.reward_scaled(theta_h, reward_multiplier, reward_h)
    if variant == REWARD_THETA:
        return ContestSpec.reward_theta(theta_h, alpha, reward_h)
    if variant == CHOKING:
        return ContestSpec.choking(theta_h, alpha, reward_h if reward_l is None else reward_l, reward_h)
    raise ValueError(f"unknown variant {variant!r}")


def effort_curve(variant, theta_max, n_points=201, theta_min=1.0, alpha=0.0,
                 reward_multiplier=1.0, reward_l=None, reward_h=1.0):
    """Equilibrium efforts along a theta grid.

    Returns an (n_points, 4) array with columns theta, e_l, e_h, p_h. The
    derived-reward variants rebuild reward_l at every theta.
    """
    if not theta_max > theta_min:
        raise ValueError("theta_max must exceed theta_min")
    if theta_min < 1.0:
        raise ValueError("theta range must start at or above 1")
    if n_points < 2:
        raise ValueError("need at least two curve points")
    thetas = np.linspace(theta_min, theta_max, n_points)
    out = np.empty((n_points, 4))
    for i, th in enumerate(thetas):
        eq = equilibrium(spec_at(variant, float(th), alpha, reward_multiplier, reward_l, reward_h))
        out[i] = (th, eq.effort_l, eq.effort_h, eq.win_prob_h)
    return out


CURVE_HEADER = "theta,e_l,e_h,p_h"


def write_curve_csv(path, curve):
    """Serialise an effort_curve table with the fixed header."""
    np.savetxt(path, np.asarray(curve), delimiter=",", header=CURVE_HEADER,
               comments="", fmt="%.12g")


def choking_peak_theta(alpha):
    """Location of the high player's effort peak under choking with R_l = R_h.

    Setting d/dtheta log e_h* = 0 gives theta**(alpha+1) = 2*alpha + 1, so the
    peak sits at (2*alpha+1)**(1/(alpha+1)); confirmed numerically in tests.
    """
    if alpha <= 0:
        raise ValueError("peak is interior only for alpha > 0")
    return (2.0 * alpha + 1.0) ** (1.0 / (alpha + 1.0))
