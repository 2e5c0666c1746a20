"""Prosocial reward shaping in generalized Stag Hunt games.

Closed-form threshold analysis, deterministic belief dynamics, independent
policy-gradient learners for matrix/network/weak-link games, grid-world
Markov games with a small from-scratch conv policy network, and a seeded
experiment harness with CSV output.
"""

from staghunt.matrix_games import (
    FORAGE,
    HUNT,
    BimatrixGame,
    ProsocialWeight,
    StagHuntPayoffs,
    StrategyProfile,
    alpha_star,
    dominance_alpha,
    enumerate_pure_nash,
    is_all_subgames_staghunt,
    is_risk_dominant_hunt,
    parse_matrix,
    prosocial_transform,
    pstar,
    risk_dominance,
    sort_by_diagonal,
    to_bimatrix,
)

__all__ = [
    "FORAGE",
    "HUNT",
    "BimatrixGame",
    "ProsocialWeight",
    "StagHuntPayoffs",
    "StrategyProfile",
    "alpha_star",
    "dominance_alpha",
    "enumerate_pure_nash",
    "is_all_subgames_staghunt",
    "is_risk_dominant_hunt",
    "parse_matrix",
    "prosocial_transform",
    "pstar",
    "risk_dominance",
    "sort_by_diagonal",
    "to_bimatrix",
]

__version__ = "0.1.0"
