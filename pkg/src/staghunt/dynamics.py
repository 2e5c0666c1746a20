"""Deterministic belief-based best-response dynamics on 2x2 games.

Each agent tracks the probability that its partner plays Hunt, best-responds
to that belief against its own (possibly prosocially mixed) reward table,
and then smooths the belief toward what the partner actually did. Basins of
attraction are measured by iterating the map from a grid of interior belief
pairs. The smoothing magnitude is a free parameter of the model; the default
of 0.2 avoids the synchronous-update oscillation that a full replacement
step can produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from staghunt.matrix_games import (
    BimatrixGame,
    ProsocialWeight,
    StagHuntPayoffs,
    prosocial_transform,
    to_bimatrix,
)


@dataclass(frozen=True)
class BeliefState:
    """Each agent's probability that the partner plays Hunt."""

    p1: float
    p2: float

    def __post_init__(self):
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise ValueError(f"beliefs must lie in [0, 1], got ({self.p1}, {self.p2})")


@dataclass(frozen=True)
class DynamicConfig:
    """Belief smoothing rate, iteration cap, and absorption tolerance."""

    step: float = 0.2
    max_iters: int = 1000
    tol: float = 1e-6

    def __post_init__(self):
        if not (0.0 < self.step <= 1.0):
            raise ValueError(f"step must be in (0, 1], got {self.step}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class BasinEstimate:
    """Fractions of the interior belief grid absorbed by each equilibrium."""

    fraction_hunt: float
    fraction_forage: float
    unresolved: float
    resolution: int


def _hunt_preference_gaps(game: BimatrixGame, p1, p2):
    """Expected-utility margin of Hunt over Forage for each agent's belief.

    Player 1 weighs rows of its table by belief p1 over the partner's
    columns; player 2 weighs columns of its table by belief p2 over the
    partner's rows. Accepts scalars or arrays.
    """
    u1, u2 = game.r1, game.r2
    gap1 = p1 * (u1[0, 0] - u1[1, 0]) + (1.0 - p1) * (u1[0, 1] - u1[1, 1])
    gap2 = p2 * (u2[0, 0] - u2[0, 1]) + (1.0 - p2) * (u2[1, 0] - u2[1, 1])
    return gap1, gap2


def step_beliefs(game: BimatrixGame, b: BeliefState, cfg: DynamicConfig) -> BeliefState:
    """One synchronous round: best respond to beliefs, then smooth them.

    The game must be the (already transformed) 2x2 reward pair each agent
    actually optimizes. Ties in the expected-utility comparison resolve to
    Hunt. Belief i moves toward 1 if the partner hunted, toward 0 otherwise,
    at rate ``cfg.step``.
    """
    if game.r1.shape != (2, 2):
        raise ValueError("belief dynamics are defined for 2x2 games")
    gap1, gap2 = _hunt_preference_gaps(game, b.p1, b.p2)
    hunts1 = gap1 >= 0.0
    hunts2 = gap2 >= 0.0
    lam = cfg.step
    return BeliefState(
        p1=(1.0 - lam) * b.p1 + lam * (1.0 if hunts2 else 0.0),
        p2=(1.0 - lam) * b.p2 + lam * (1.0 if hunts1 else 0.0),
    )


def basin_fraction(
    payoffs: StagHuntPayoffs,
    alpha1: ProsocialWeight,
    alpha2: ProsocialWeight,
    cfg: DynamicConfig = DynamicConfig(),
    resolution: int = 101,
) -> BasinEstimate:
    """Fraction of interior belief starts converging to joint hunting.

    Starts are cell centers ((i+0.5)/R, (j+0.5)/R), which keeps the sweep in
    the open square. Every start is iterated with the same rule as
    ``step_beliefs`` (vectorized) until both beliefs are within ``cfg.tol``
    of (1,1) or of (0,0); starts still unabsorbed at ``cfg.max_iters`` are
    reported as unresolved, never dropped.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    game = prosocial_transform(to_bimatrix(payoffs), alpha1, alpha2)
    centers = (np.arange(resolution) + 0.5) / resolution
    grid1, grid2 = np.meshgrid(centers, centers, indexing="ij")
    p1 = grid1.ravel().copy()
    p2 = grid2.ravel().copy()
    total = p1.size

    lam = cfg.step
    hunt_count = 0
    forage_count = 0
    active = np.arange(total)
    for _ in range(cfg.max_iters):
        if active.size == 0:
            break
        q1, q2 = p1[active], p2[active]
        gap1, gap2 = _hunt_preference_gaps(game, q1, q2)
        hunts1 = gap1 >= 0.0
        hunts2 = gap2 >= 0.0
        q1 = (1.0 - lam) * q1 + lam * hunts2
        q2 = (1.0 - lam) * q2 + lam * hunts1
        p1[active] = q1
        p2[active] = q2
        to_hunt = (1.0 - q1 <= cfg.tol) & (1.0 - q2 <= cfg.tol)
        to_forage = (q1 <= cfg.tol) & (q2 <= cfg.tol)
        hunt_count += int(to_hunt.sum())
        forage_count += int(to_forage.sum())
        active = active[~(to_hunt | to_forage)]

    unresolved = active.size
    return BasinEstimate(
        fraction_hunt=hunt_count / total,
        fraction_forage=forage_count / total,
        unresolved=unresolved / total,
        resolution=resolution,
    )
