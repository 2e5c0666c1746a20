"""Payoff structures, prosocial payoff mixing, and closed-form threshold
analysis for strategic-form coordination games.

Strategy 0 is always the risky cooperative action (Hunt) and strategy 1 the
safe one (Forage) in the 2x2 case. All values are immutable after
construction and every operation is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HUNT = 0
FORAGE = 1


@dataclass(frozen=True)
class StagHuntPayoffs:
    """The four scalar rewards of a generalized Stag Hunt.

    h: both hunt, c: forage while the partner hunts, m: both forage,
    g: hunt alone. Requires h > c >= m > g.
    """

    h: float
    c: float
    m: float
    g: float

    def __post_init__(self):
        if not (self.h > self.c):
            raise ValueError(f"need h > c, got h={self.h}, c={self.c}")
        if not (self.c >= self.m):
            raise ValueError(f"need c >= m, got c={self.c}, m={self.m}")
        if not (self.m > self.g):
            raise ValueError(f"need m > g, got m={self.m}, g={self.g}")


@dataclass(frozen=True)
class ProsocialWeight:
    """Weight an agent puts on partners' rewards; 0 selfish, 1 selfless."""

    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class StrategyProfile:
    """A pure strategy pair (row player's index, column player's index)."""

    a1: int
    a2: int


class BimatrixGame:
    """Two-player strategic-form game with per-player reward tables.

    ``r1[i, j]`` is the row player's reward and ``r2[i, j]`` the column
    player's when row plays i and column plays j. Tables are stored as
    read-only float arrays of identical shape.
    """

    def __init__(self, r1, r2):
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        if r1.ndim != 2 or r1.shape != r2.shape:
            raise ValueError(f"reward tables must share a 2D shape, got {r1.shape} vs {r2.shape}")
        r1.setflags(write=False)
        r2.setflags(write=False)
        self.r1 = r1
        self.r2 = r2

    @property
    def n1(self) -> int:
        return self.r1.shape[0]

    @property
    def n2(self) -> int:
        return self.r1.shape[1]

    @property
    def symmetric(self) -> bool:
        return self.n1 == self.n2 and bool(np.array_equal(self.r2, self.r1.T))

    def profile_in_bounds(self, profile: StrategyProfile) -> bool:
        return 0 <= profile.a1 < self.n1 and 0 <= profile.a2 < self.n2

    def __repr__(self):
        return f"BimatrixGame(r1={self.r1.tolist()}, r2={self.r2.tolist()})"


def to_bimatrix(p: StagHuntPayoffs) -> BimatrixGame:
    """Expand Stag Hunt payoffs into the symmetric 2x2 bimatrix.

    Row player's table is [[h, g], [c, m]]; the column player sees its
    transpose. Strategy 0 = Hunt, strategy 1 = Forage.
    """
    r1 = np.array([[p.h, p.g], [p.c, p.m]])
    return BimatrixGame(r1, r1.T)


def prosocial_transform(game: BimatrixGame, alpha1: ProsocialWeight,
                        alpha2: ProsocialWeight) -> BimatrixGame:
    """Mix each player's rewards with its partner's by its own weight.

    Player 1's table becomes (1-a1)*r1 + a1*r2 and player 2's
    (1-a2)*r2 + a2*r1, elementwise.
    """
    a1, a2 = alpha1.alpha, alpha2.alpha
    u1 = (1.0 - a1) * game.r1 + a1 * game.r2
    u2 = (1.0 - a2) * game.r2 + a2 * game.r1
    return BimatrixGame(u1, u2)


def pstar(p: StagHuntPayoffs, alpha: ProsocialWeight) -> float:
    """Minimum belief in the partner hunting that makes Hunt a best response.

    Closed form ((m-g) - alpha*(c-g)) / (h+m-g-c), clamped to [0, 1]. An
    agent mixing its reward with the partner's at weight alpha prefers Hunt
    whenever its belief is at or above this value.
    """
    denom = p.h + p.m - p.g - p.c
    assert denom > 0.0, "Stag Hunt inequalities force h+m-g-c > 0"
    raw = ((p.m - p.g) - alpha.alpha * (p.c - p.g)) / denom
    return min(1.0, max(0.0, raw))


def alpha_star(p: StagHuntPayoffs) -> ProsocialWeight:
    """Smallest prosociality making Hunt weakly dominant: (m-g)/(c-g)."""
    value = (p.m - p.g) / (p.c - p.g)
    assert 0.0 < value <= 1.0, "Stag Hunt inequalities force alpha* in (0, 1]"
    return ProsocialWeight(value)


def enumerate_pure_nash(game: BimatrixGame) -> set[StrategyProfile]:
    """All pure profiles from which neither player gains by deviating.

    Uses weak inequalities: a profile survives if each player's reward is a
    (possibly tied) maximum against the other's fixed strategy. Payoff
    comparisons are exact; no epsilon.
    """
    row_best = game.r1 == game.r1.max(axis=0, keepdims=True)
    col_best = game.r2 == game.r2.max(axis=1, keepdims=True)
    rows, cols = np.nonzero(row_best & col_best)
    return {StrategyProfile(int(i), int(j)) for i, j in zip(rows, cols)}


def sort_by_diagonal(game: BimatrixGame) -> BimatrixGame:
    """Reindex a symmetric game so diagonal payoffs are non-increasing.

    Ties keep their original order. This is the canonical form expected by
    ``is_all_subgames_staghunt``.
    """
    if not game.symmetric:
        raise ValueError("diagonal canonicalization is defined for symmetric games only")
    diag = np.diag(game.r1)
    order = sorted(range(len(diag)), key=lambda i: (-diag[i], i))
    u = game.r1[np.ix_(order, order)]
    return BimatrixGame(u, u.T)


def is_all_subgames_staghunt(game: BimatrixGame) -> bool:
    """Whether every 2x2 strategy-pair restriction is a generalized Stag Hunt.

    Requires a symmetric game already sorted so the diagonal is
    non-increasing (see ``sort_by_diagonal``); for every i < j the entries
    must satisfy u_ii > u_ji >= u_jj > u_ij.
    """
    if not game.symmetric:
        raise ValueError("subgame condition is defined for symmetric games only")
    u = game.r1
    diag = np.diag(u)
    if np.any(np.diff(diag) > 0):
        raise ValueError("diagonal not sorted non-increasing; canonicalize with sort_by_diagonal")
    n = game.n1
    for i in range(n):
        for j in range(i + 1, n):
            if not (u[i, i] > u[j, i] >= u[j, j] > u[i, j]):
                return False
    return True


def _strategy_zero_dominates(u: np.ndarray, alpha: float) -> bool:
    """Strategy 0 weakly dominates every other strategy within each
    pair restriction of the alpha-mixed table (1-alpha)*u + alpha*u.T."""
    ua = (1.0 - alpha) * u + alpha * u.T
    n = u.shape[0]
    for j in range(1, n):
        if not (ua[0, 0] >= ua[j, 0] and ua[0, j] >= ua[j, j]):
            return False
    return True


def dominance_alpha(game: BimatrixGame, grid_step: float = 1e-4) -> ProsocialWeight:
    """Smallest prosociality at which strategy 0 becomes weakly dominant.

    Dominance is checked pairwise: within every {0, j} restriction of the
    mixed table, strategy 0 weakly dominates j. The check is monotone in
    alpha, so the grid scan is a bisection over grid points followed by
    binary refinement inside the bracketing cell.
    """
    if not is_all_subgames_staghunt(game):
        raise ValueError("game must pass is_all_subgames_staghunt")
    u = game.r1
    if _strategy_zero_dominates(u, 0.0):
        return ProsocialWeight(0.0)
    assert _strategy_zero_dominates(u, 1.0), "dominance must hold at the selfless boundary"

    n_cells = int(round(1.0 / grid_step))
    lo, hi = 0, n_cells  # predicate false at lo, true at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _strategy_zero_dominates(u, mid * grid_step):
            hi = mid
        else:
            lo = mid
    a_lo, a_hi = lo * grid_step, hi * grid_step
    for _ in range(60):
        mid = 0.5 * (a_lo + a_hi)
        if _strategy_zero_dominates(u, mid):
            a_hi = mid
        else:
            a_lo = mid
    return ProsocialWeight(min(1.0, a_hi))


@dataclass(frozen=True)
class RiskDominance:
    """Pure-strategy risk dominance verdict for the Hunt equilibrium."""

    hunt: bool
    tie: bool


def risk_dominance(p: StagHuntPayoffs) -> RiskDominance:
    """Classify which equilibrium owns the larger best-response basin.

    Hunt is risk dominant iff the selfish threshold is below one half. An
    exact tie at 0.5 reports hunt=False with the tie flag set.
    """
    threshold = pstar(p, ProsocialWeight(0.0))
    return RiskDominance(hunt=threshold < 0.5, tie=threshold == 0.5)


def is_risk_dominant_hunt(p: StagHuntPayoffs) -> bool:
    """True iff Hunt has the strictly larger basin (selfish threshold < 0.5)."""
    return risk_dominance(p).hunt


def parse_matrix(text: str, symmetric: bool = True) -> BimatrixGame:
    """Parse a plain-text reward table into a game.

    Rows are separated by newlines or ';', entries by whitespace or ','.
    One table gives the row player's rewards; with ``symmetric`` the column
    player sees its transpose. Two tables separated by a blank line or '|'
    give both players' rewards explicitly.
    """
    text = text.strip()
    if "|" in text:
        parts = text.split("|")
    elif "\n\n" in text:
        parts = text.split("\n\n")
    else:
        parts = [text]

    def read_table(block: str) -> np.ndarray:
        rows = [r for chunk in block.strip().splitlines() for r in chunk.split(";")]
        values = [[float(v) for v in row.replace(",", " ").split()] for row in rows if row.strip()]
        if not values or len({len(r) for r in values}) != 1:
            raise ValueError("matrix rows must be non-empty and of equal length")
        return np.array(values)

    r1 = read_table(parts[0])
    if len(parts) == 1:
        if not symmetric:
            raise ValueError("a single table requires symmetric=True")
        if r1.shape[0] != r1.shape[1]:
            raise ValueError("symmetric game requires a square table")
        return BimatrixGame(r1, r1.T)
    if len(parts) == 2:
        return BimatrixGame(r1, read_table(parts[1]))
    raise ValueError("expected one or two tables")
