"""Strategic-form environments: dyads, coordination on graphs, weak-link.

All three expose the same shape of interface: a joint action vector in,
one reward per agent out. They are stateless pure reward functions and
safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from staghunt.matrix_games import FORAGE, HUNT, StagHuntPayoffs


def dyad_step(payoffs: StagHuntPayoffs, a1: int, a2: int) -> tuple[float, float]:
    """Rewards of one simultaneous play of the 2x2 table."""
    table = {
        (HUNT, HUNT): (payoffs.h, payoffs.h),
        (HUNT, FORAGE): (payoffs.g, payoffs.c),
        (FORAGE, HUNT): (payoffs.c, payoffs.g),
        (FORAGE, FORAGE): (payoffs.m, payoffs.m),
    }
    if (a1, a2) not in table:
        raise ValueError(f"actions must be Hunt(0) or Forage(1), got ({a1}, {a2})")
    return table[(a1, a2)]


@dataclass(frozen=True)
class NetworkGame:
    """Stag Hunt played pairwise along graph edges with one action per agent.

    Each agent commits to a single action, plays the 2x2 game against every
    neighbor with it, and receives the average (or total) of those payoffs.
    """

    adjacency: np.ndarray
    payoffs: StagHuntPayoffs
    aggregation: str = "average"

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj)):
            raise ValueError("self-loops are not allowed")
        if np.any(adj.sum(axis=1) == 0):
            raise ValueError("every agent needs at least one neighbor")
        if self.aggregation not in ("average", "total"):
            raise ValueError(f"aggregation must be 'average' or 'total', got {self.aggregation!r}")
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @property
    def n_agents(self) -> int:
        return self.adjacency.shape[0]


def graph_preset(kind: str, n: int = 5) -> np.ndarray:
    """Adjacency for the named topology; the star's hub is agent 0."""
    if n < 2:
        raise ValueError("need at least two agents")
    if kind == "complete":
        adj = np.ones((n, n), dtype=bool)
        np.fill_diagonal(adj, False)
    elif kind == "star":
        adj = np.zeros((n, n), dtype=bool)
        adj[0, 1:] = True
        adj[1:, 0] = True
    else:
        raise ValueError(f"unknown graph preset {kind!r}")
    return adj


def network_step(game: NetworkGame, actions) -> np.ndarray:
    """Per-agent aggregated payoff from playing every neighbor at once."""
    actions = list(actions)
    if len(actions) != game.n_agents:
        raise ValueError(f"expected {game.n_agents} actions, got {len(actions)}")
    rewards = np.zeros(game.n_agents)
    for i in range(game.n_agents):
        neighbors = np.nonzero(game.adjacency[i])[0]
        payout = sum(dyad_step(game.payoffs, actions[i], actions[j])[0] for j in neighbors)
        rewards[i] = payout / len(neighbors) if game.aggregation == "average" else payout
    return rewards


@dataclass(frozen=True)
class WeakLinkGame:
    """Minimum-effort group game: payoff is a*min(efforts) - own effort."""

    a: float = 2.0
    n_players: int = 5
    max_effort: int = 5

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("payoff multiplier must be positive")
        if self.n_players < 2 or self.max_effort < 1:
            raise ValueError("need at least two players and one positive effort level")

    @property
    def n_actions(self) -> int:
        return self.max_effort + 1


def weaklink_step(game: WeakLinkGame, efforts) -> np.ndarray:
    """Rewards a*min(e) - e_i for one simultaneous choice of efforts."""
    efforts = np.asarray(list(efforts))
    if efforts.size != game.n_players:
        raise ValueError(f"expected {game.n_players} efforts, got {efforts.size}")
    if np.any((efforts < 0) | (efforts > game.max_effort)):
        raise ValueError(f"efforts must lie in 0..{game.max_effort}")
    return game.a * efforts.min() - efforts.astype(float)
