"""Declarative experiment configuration, sweep expansion, and YAML IO."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import yaml

MATRIX = "matrix"
NETWORK = "network"
WEAKLINK = "weaklink"
MARKOV_GAMES = ("stag_hunt", "harvest", "escalation")
ALL_GAMES = (MATRIX, NETWORK, WEAKLINK) + MARKOV_GAMES

# Name of each game's risk knob, used in condition labels and reports.
RISK_NAMES = {
    MATRIX: "penalty",
    NETWORK: "penalty",
    WEAKLINK: "A",
    "stag_hunt": "g",
    "harvest": "f",
    "escalation": "mult",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment cell needs, flat and serializable.

    Strategic-form games read the payoff fields (g is the raw payoff, so a
    penalty of 3 means g = -3); grid games read their own risk fields. The
    ``alphas`` tuple assigns one prosociality weight per agent and is the
    only way prosociality enters a run.
    """

    game: str
    experiment_id: str = ""
    condition: str = ""
    # strategic-form payoffs (matrix, network)
    h: float = 2.0
    c: float = 1.0
    m: float = 1.0
    g: float = -1.0
    # network topology; adjacency (nested 0/1 rows) overrides the preset
    graph: str = "star"
    adjacency: tuple = ()
    n_agents: int = 2
    aggregation: str = "average"
    # weak-link
    weaklink_a: float = 2.0
    max_effort: int = 5
    # grid-game risk parameters
    gore_penalty: float = 1.0
    young_fraction: float = 0.5
    spawn_prob: float = 0.5
    penalty_multiplier: float = 1.0
    # prosociality assignment
    alphas: tuple = (0.0, 0.0)
    mixer_mode: str = "average"
    # learner
    lr: float = 0.01
    init_sigma: float = 1.0
    baseline: bool = False
    # run sizes
    rounds: int = 400
    episodes: int = 2000
    replicates: int = 300
    base_seed: int = 0
    block_size: int = 50
    # grid-game training
    batch_episodes: int = 64
    discount: float = 0.99
    entropy_weight: float = 0.0
    episode_mean_length: int = 250
    base_channels: int = 16
    net_lr: float = 1e-3
    classify_threshold: float = 0.5

    def __post_init__(self):
        if self.game not in ALL_GAMES:
            raise ValueError(f"unknown game {self.game!r}; expected one of {ALL_GAMES}")
        if any(not (0.0 <= a <= 1.0) for a in self.alphas):
            raise ValueError("every alpha must lie in [0, 1]")
        if len(self.alphas) != self.n_agents:
            raise ValueError(f"{self.n_agents} agents need {self.n_agents} alphas, got {len(self.alphas)}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.adjacency:
            rows = tuple(tuple(int(v) for v in row) for row in self.adjacency)
            if len(rows) != self.n_agents:
                raise ValueError(f"adjacency is {len(rows)} rows but n_agents={self.n_agents}")
            object.__setattr__(self, "adjacency", rows)
        if not self.experiment_id:
            object.__setattr__(self, "experiment_id", self.game)
        if not self.condition:
            object.__setattr__(self, "condition", derive_condition(self))

    @property
    def is_markov(self) -> bool:
        return self.game in MARKOV_GAMES

    @property
    def risk_value(self) -> float:
        if self.game in (MATRIX, NETWORK):
            return -self.g  # penalty magnitude
        if self.game == WEAKLINK:
            return self.weaklink_a
        if self.game == "stag_hunt":
            return self.gore_penalty
        if self.game == "harvest":
            return self.young_fraction
        return self.penalty_multiplier


def default_config(game: str, **overrides) -> ExperimentConfig:
    """Per-game defaults: agent counts, replicate counts, and block sizes."""
    base: dict = {"game": game}
    if game == MATRIX:
        base.update(n_agents=2, alphas=(0.0, 0.0), replicates=300, rounds=400, block_size=50)
    elif game == NETWORK:
        base.update(n_agents=5, alphas=(0.0,) * 5, replicates=100, rounds=400, block_size=50)
    elif game == WEAKLINK:
        base.update(n_agents=5, alphas=(0.0,) * 5, replicates=100, rounds=400, block_size=50)
    else:
        base.update(n_agents=2, alphas=(0.0, 0.0), replicates=10, episodes=20_000, block_size=1000)
        if game == "stag_hunt":
            base.update(entropy_weight=0.05)
    base.update(overrides)
    if "alphas" in base:
        base["alphas"] = tuple(base["alphas"])
    return ExperimentConfig(**base)


def assignment_alphas(assignment: str, n_agents: int, alpha_value: float) -> tuple:
    """Expand a named prosociality assignment into per-agent weights.

    "single" and "center" make agent 0 prosocial (on the star preset the
    hub is agent 0), "leaf" makes agent 1 prosocial.
    """
    if assignment == "none":
        return (0.0,) * n_agents
    if assignment == "all":
        return (alpha_value,) * n_agents
    if assignment in ("single", "center"):
        return (alpha_value,) + (0.0,) * (n_agents - 1)
    if assignment == "leaf":
        if n_agents < 2:
            raise ValueError("leaf assignment needs at least two agents")
        return (0.0, alpha_value) + (0.0,) * (n_agents - 2)
    raise ValueError(f"unknown assignment {assignment!r}")


def classify_assignment(alphas) -> str:
    """Name the assignment pattern of an alpha vector (best effort)."""
    positive = [i for i, a in enumerate(alphas) if a > 0]
    if not positive:
        return "none"
    if len(positive) == len(alphas):
        return "all"
    if positive == [0]:
        return "single"
    if positive == [1]:
        return "leaf"
    return "custom"


def derive_condition(cfg: ExperimentConfig) -> str:
    risk = cfg.risk_value
    return f"{classify_assignment(cfg.alphas)}|{RISK_NAMES[cfg.game]}={risk:g}"


def apply_risk(cfg_fields: dict, game: str, value: float) -> None:
    """Write one sweep-grid risk value into the right config field."""
    if game in (MATRIX, NETWORK):
        cfg_fields["g"] = -value
    elif game == WEAKLINK:
        cfg_fields["weaklink_a"] = value
    elif game == "stag_hunt":
        cfg_fields["gore_penalty"] = value
    elif game == "harvest":
        cfg_fields["young_fraction"] = value
    elif game == "escalation":
        cfg_fields["penalty_multiplier"] = value
    else:
        raise ValueError(f"unknown game {game!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid over risk values and prosociality assignments."""

    game: str
    risk_values: tuple
    assignments: tuple
    alpha_value: float = 0.5
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.risk_values or not self.assignments:
            raise ValueError("sweep grid must be non-empty")

    def cells(self) -> list[ExperimentConfig]:
        out = []
        for risk in self.risk_values:
            for assignment in self.assignments:
                fields = dict(self.overrides)
                fields.pop("game", None)
                base = default_config(self.game, **fields)
                cell: dict = dataclasses.asdict(base)
                apply_risk(cell, self.game, risk)
                cell["alphas"] = assignment_alphas(assignment, base.n_agents, self.alpha_value)
                cell["condition"] = f"{assignment}|{RISK_NAMES[self.game]}={risk:g}"
                out.append(ExperimentConfig(**cell))
        return out


def config_to_yaml(cfg: ExperimentConfig) -> str:
    data = dataclasses.asdict(cfg)
    data["alphas"] = list(cfg.alphas)
    data["adjacency"] = [list(row) for row in cfg.adjacency]
    return yaml.safe_dump(data, sort_keys=True)


def config_from_dict(data: dict) -> ExperimentConfig:
    fields = dict(data)
    game = fields.pop("game")
    if "alphas" in fields:
        fields["alphas"] = tuple(fields["alphas"])
    if "adjacency" in fields:
        fields["adjacency"] = tuple(tuple(row) for row in fields["adjacency"])
    return default_config(game, **fields)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh))


def load_sweep(path) -> SweepSpec:
    """Read a sweep file: game, risk values, assignments, plus overrides."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if "sweep" in data:
        data = data["sweep"]
    return SweepSpec(
        game=data.pop("game"),
        risk_values=tuple(data.pop("risk_values")),
        assignments=tuple(data.pop("assignments")),
        alpha_value=float(data.pop("alpha_value", 0.5)),
        overrides=data,
    )
