"""Two-player 5x5 grid Markov games: Stag Hunt, Harvest, Escalation.

Agents move simultaneously in the four cardinal directions (off-grid moves
are no-ops) and may share cells. Each step applies, in order: agent moves,
game-specific reward resolution and entity dynamics, respawns, then the
termination check. All stochastic choices draw from the single generator
passed in, in a fixed documented order, so identical seeds give
bit-identical trajectories.

Game rules:

* Stag Hunt grid: one stag and two plants are always on the board. An agent
  on a plant cell collects 1 (plant respawns elsewhere); both agents on the
  stag cell collect 5 each (stag respawns); a lone agent on the stag cell
  loses the gore penalty and the stag stays. After resolution the stag
  steps one cell toward the nearer agent (Manhattan; ties toward agent 1,
  horizontal moves preferred) unless plants block every closing move. A
  stationary lone agent is gored again every step it remains in contact.

* Harvest: young plants spawn at random empty cells (at most four on the
  board), mature at rate 1/(20f), and mature plants die at rate
  1/(20(1-f)), so unpicked plants live 20 steps in expectation. Picking a
  young plant pays 1 to the picker; picking a mature plant pays 2 to both
  players. Phase transitions roll only for plants present before the step,
  so a plant never matures the step it spawns nor dies the step it matures.

* Escalation: one marker cell is active. If both agents stand on it, both
  collect 1, the streak grows, and the marker moves to a random adjacent
  cell. Once the streak has started, any step without joint presence ends
  the episode and any agent still on the marker (the non-breaker) is
  penalized by multiplier times the streak. Episodes are capped at 50
  steps.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

BOARD_SIZE = 5
N_CHANNELS = 7
ESCALATION_STEP_CAP = 50

# Observation channel layout.
CH_SELF, CH_PARTNER, CH_STAG, CH_YOUNG, CH_MATURE, CH_MARKER, CH_STREAK = range(7)

STAG_HUNT = "stag_hunt"
HARVEST = "harvest"
ESCALATION = "escalation"
GAME_KINDS = (STAG_HUNT, HARVEST, ESCALATION)


class Action(IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3


_DELTAS = {
    Action.NORTH: (-1, 0),
    Action.SOUTH: (1, 0),
    Action.EAST: (0, 1),
    Action.WEST: (0, -1),
}


@dataclass(frozen=True)
class StagHuntGridConfig:
    """Penalty for touching the stag alone; capture and plant rewards."""

    gore_penalty: float = 1.0
    stag_reward: float = 5.0
    plant_reward: float = 1.0

    def __post_init__(self):
        if self.gore_penalty < 0:
            raise ValueError("gore_penalty is a magnitude and must be >= 0")


@dataclass(frozen=True)
class HarvestConfig:
    """Plant phase process tuned so expected lifetime is always 20 steps."""

    young_fraction: float = 0.5
    spawn_prob: float = 0.5
    max_plants: int = 4

    def __post_init__(self):
        if not (0.0 < self.young_fraction < 1.0):
            raise ValueError("young_fraction must lie strictly inside (0, 1)")
        if not (0.0 <= self.spawn_prob <= 1.0):
            raise ValueError("spawn_prob must be a probability")

    @property
    def r_mature(self) -> float:
        return 1.0 / (20.0 * self.young_fraction)

    @property
    def r_death(self) -> float:
        return 1.0 / (20.0 * (1.0 - self.young_fraction))


@dataclass(frozen=True)
class EscalationConfig:
    """Penalty multiplier applied to the streak length on a break."""

    penalty_multiplier: float = 1.0
    step_reward: float = 1.0

    def __post_init__(self):
        if self.penalty_multiplier <= 0:
            raise ValueError("penalty_multiplier must be positive")


@dataclass
class GridState:
    """Full mutable state of one episode of any of the three games.

    ``plants`` maps cell -> [phase, born_step]; in the grid Stag Hunt all
    plants stay "young". ``events`` summarizes the latest step for reward
    accounting and is replaced on every step.
    """

    kind: str
    config: object
    agent_positions: list[tuple[int, int]]
    stag: tuple[int, int] | None = None
    plants: dict[tuple[int, int], list] = field(default_factory=dict)
    marker: tuple[int, int] | None = None
    streak: int = 0
    step_count: int = 0
    horizon: int | None = None
    terminated: bool = False
    width: int = BOARD_SIZE
    height: int = BOARD_SIZE
    events: dict = field(default_factory=dict)


def _random_empty_cell(state: GridState, rng: np.random.Generator) -> tuple[int, int]:
    """Uniform draw over cells free of agents and entities, row-major order."""
    occupied = set(state.agent_positions)
    occupied.update(state.plants)
    if state.stag is not None:
        occupied.add(state.stag)
    if state.marker is not None:
        occupied.add(state.marker)
    candidates = [
        (r, c) for r in range(state.height) for c in range(state.width) if (r, c) not in occupied
    ]
    if not candidates:
        raise RuntimeError("no empty cell left on the board")
    return candidates[int(rng.integers(len(candidates)))]


def reset(kind: str, config, rng: np.random.Generator, horizon: int | None = None) -> GridState:
    """Fresh episode with agents and entities on distinct random cells.

    Harvest starts with an empty board (spawning begins on the first step).
    Escalation episodes are always capped at 50 steps regardless of the
    requested horizon.
    """
    if kind not in GAME_KINDS:
        raise ValueError(f"unknown game kind {kind!r}")
    if horizon is not None and horizon < 1:
        raise ValueError("horizon must be positive when given")
    cells = [(r, c) for r in range(BOARD_SIZE) for c in range(BOARD_SIZE)]
    n_entities = {STAG_HUNT: 3, HARVEST: 0, ESCALATION: 1}[kind]
    picks = rng.choice(len(cells), size=2 + n_entities, replace=False)
    spots = [cells[int(i)] for i in picks]
    state = GridState(kind=kind, config=config, agent_positions=spots[:2], horizon=horizon)
    if kind == STAG_HUNT:
        state.stag = spots[2]
        state.plants = {spots[3]: ["young", 0], spots[4]: ["young", 0]}
    elif kind == ESCALATION:
        state.marker = spots[2]
        state.horizon = min(horizon, ESCALATION_STEP_CAP) if horizon else ESCALATION_STEP_CAP
    return state


def _move_agents(state: GridState, a1: Action, a2: Action) -> None:
    for idx, action in ((0, a1), (1, a2)):
        dr, dc = _DELTAS[Action(action)]
        r, c = state.agent_positions[idx]
        nr, nc = r + dr, c + dc
        if 0 <= nr < state.height and 0 <= nc < state.width:
            state.agent_positions[idx] = (nr, nc)


def _agents_on(state: GridState, cell: tuple[int, int]) -> list[int]:
    return [i for i, pos in enumerate(state.agent_positions) if pos == cell]


def _move_stag(state: GridState) -> None:
    """One step toward the nearer agent; plants block, walls cannot occur."""
    sr, sc = state.stag
    (r1, c1), (r2, c2) = state.agent_positions
    d1 = abs(r1 - sr) + abs(c1 - sc)
    d2 = abs(r2 - sr) + abs(c2 - sc)
    tr, tc = (r1, c1) if d1 <= d2 else (r2, c2)
    if (tr, tc) == (sr, sc):
        return
    moves = []
    if tc != sc:
        moves.append((sr, sc + (1 if tc > sc else -1)))
    if tr != sr:
        moves.append((sr + (1 if tr > sr else -1), sc))
    for cell in moves:
        if cell not in state.plants:
            state.stag = cell
            return


def _step_stag_hunt(state: GridState, rng: np.random.Generator) -> tuple[float, float]:
    cfg: StagHuntGridConfig = state.config
    r = [0.0, 0.0]
    events = state.events
    # Plant pickups; simultaneous arrivals resolve to the lower-index agent.
    for cell in sorted(state.plants):
        takers = _agents_on(state, cell)
        if takers:
            r[takers[0]] += cfg.plant_reward
            del state.plants[cell]
            state.plants[_random_empty_cell(state, rng)] = ["young", state.step_count]
            events["plant_picks"] += 1
    on_stag = _agents_on(state, state.stag)
    if len(on_stag) == 2:
        r[0] += cfg.stag_reward
        r[1] += cfg.stag_reward
        events["captures"] += 1
        state.stag = _random_empty_cell(state, rng)
    elif len(on_stag) == 1:
        r[on_stag[0]] -= cfg.gore_penalty
        events["gores"] += 1
    _move_stag(state)
    return r[0], r[1]


def _step_harvest(state: GridState, rng: np.random.Generator) -> tuple[float, float]:
    cfg: HarvestConfig = state.config
    r = [0.0, 0.0]
    events = state.events
    # Phase rolls only for plants that existed before this step.
    for cell in sorted(state.plants):
        plant = state.plants[cell]
        if plant[0] == "mature":
            if rng.random() < cfg.r_death:
                events["plant_deaths"].append(state.step_count - plant[1])
                del state.plants[cell]
        else:
            if rng.random() < cfg.r_mature:
                plant[0] = "mature"
    if len(state.plants) < cfg.max_plants and rng.random() < cfg.spawn_prob:
        state.plants[_random_empty_cell(state, rng)] = ["young", state.step_count]
    for cell in sorted(state.plants):
        takers = _agents_on(state, cell)
        if not takers:
            continue
        if state.plants[cell][0] == "mature":
            r[0] += 2.0
            r[1] += 2.0
            events["mature_picks"] += 1
        else:
            r[takers[0]] += 1.0
            events["young_picks"] += 1
        del state.plants[cell]
    return r[0], r[1]


def _step_escalation(state: GridState, rng: np.random.Generator) -> tuple[float, float]:
    cfg: EscalationConfig = state.config
    r = [0.0, 0.0]
    on_marker = _agents_on(state, state.marker)
    if len(on_marker) == 2:
        r[0] += cfg.step_reward
        r[1] += cfg.step_reward
        state.streak += 1
        state.events["joint_visits"] += 1
        mr, mc = state.marker
        adjacent = [
            (mr + dr, mc + dc)
            for dr, dc in ((-1, 0), (1, 0), (0, 1), (0, -1))
            if 0 <= mr + dr < state.height and 0 <= mc + dc < state.width
        ]
        state.marker = adjacent[int(rng.integers(len(adjacent)))]
    elif state.streak >= 1:
        # Streak broken: whoever still stands on the marker takes the loss.
        for idx in on_marker:
            r[idx] -= cfg.penalty_multiplier * state.streak
        state.events["broke"] = True
        state.events["penalized"] = len(on_marker)
        state.terminated = True
    return r[0], r[1]


def step(state: GridState, a1: Action, a2: Action,
         rng: np.random.Generator) -> tuple[GridState, float, float, bool]:
    """Advance one joint step, mutating and returning the state."""
    if state.terminated:
        raise RuntimeError("cannot step a terminated episode")
    state.events = _fresh_events(state.kind)
    _move_agents(state, a1, a2)
    if state.kind == STAG_HUNT:
        r1, r2 = _step_stag_hunt(state, rng)
    elif state.kind == HARVEST:
        r1, r2 = _step_harvest(state, rng)
    else:
        r1, r2 = _step_escalation(state, rng)
    state.step_count += 1
    if state.horizon is not None and state.step_count >= state.horizon:
        state.terminated = True
    return state, r1, r2, state.terminated


def _fresh_events(kind: str) -> dict:
    if kind == STAG_HUNT:
        return {"plant_picks": 0, "captures": 0, "gores": 0}
    if kind == HARVEST:
        return {"young_picks": 0, "mature_picks": 0, "plant_deaths": []}
    return {"joint_visits": 0, "broke": False, "penalized": 0}


def observe(state: GridState, agent_id: int) -> np.ndarray:
    """Channel-plane tensor view of the state from one agent's seat.

    Planes: own position, partner position, stag, young plants, mature
    plants, marker, and a constant plane with streak/50. Planes a game does
    not use stay zero.
    """
    if agent_id not in (1, 2):
        raise ValueError("agent_id must be 1 or 2")
    obs = np.zeros((N_CHANNELS, state.height, state.width))
    own = state.agent_positions[agent_id - 1]
    other = state.agent_positions[2 - agent_id]
    obs[CH_SELF][own] = 1.0
    obs[CH_PARTNER][other] = 1.0
    if state.stag is not None:
        obs[CH_STAG][state.stag] = 1.0
    for cell, (phase, _) in state.plants.items():
        obs[CH_YOUNG if phase == "young" else CH_MATURE][cell] = 1.0
    if state.marker is not None:
        obs[CH_MARKER][state.marker] = 1.0
    obs[CH_STREAK].fill(state.streak / ESCALATION_STEP_CAP)
    return obs


def episode_length_sampler(mean: float, rng: np.random.Generator,
                           max_length: int | None = None) -> int:
    """Geometric episode length with the given mean, optionally capped.

    Per-step continuation probability is 1 - 1/mean, the discrete analogue
    of an exponential horizon; mean=1 always gives length 1.
    """
    if mean < 1:
        raise ValueError("mean episode length must be >= 1")
    length = int(rng.geometric(1.0 / mean))
    if max_length is not None:
        length = min(length, max_length)
    return length


def validate_invariants(state: GridState) -> None:
    """Raise if any structural state invariant is violated."""
    for pos in state.agent_positions:
        if not (0 <= pos[0] < state.height and 0 <= pos[1] < state.width):
            raise AssertionError(f"agent off-board at {pos}")
    entity_cells = list(state.plants)
    if state.stag is not None:
        entity_cells.append(state.stag)
    if state.marker is not None:
        entity_cells.append(state.marker)
    for pos in entity_cells:
        if not (0 <= pos[0] < state.height and 0 <= pos[1] < state.width):
            raise AssertionError(f"entity off-board at {pos}")
    if len(set(entity_cells)) != len(entity_cells):
        raise AssertionError("entities overlap")
    if state.kind == STAG_HUNT:
        if state.stag is None or len(state.plants) != 2:
            raise AssertionError("stag hunt must keep 1 stag and 2 plants")
        if any(phase != "young" for phase, _ in state.plants.values()):
            raise AssertionError("stag hunt plants have no maturity phase")
    elif state.kind == HARVEST:
        if len(state.plants) > state.config.max_plants:
            raise AssertionError("harvest plant cap exceeded")
        if any(phase not in ("young", "mature") for phase, _ in state.plants.values()):
            raise AssertionError("invalid plant phase")
    else:
        if not state.terminated and state.marker is None:
            raise AssertionError("escalation needs an active marker")
    if state.streak < 0 or (state.kind != ESCALATION and state.streak != 0):
        raise AssertionError("invalid streak")


def state_hash(state: GridState) -> str:
    """Stable digest of the observable state, for trajectory dumps."""
    payload = (
        state.kind,
        tuple(state.agent_positions),
        state.stag,
        tuple(sorted((cell, info[0]) for cell, info in state.plants.items())),
        state.marker,
        state.streak,
        state.step_count,
        state.terminated,
    )
    return hashlib.md5(repr(payload).encode()).hexdigest()


def trajectory_line(state: GridState, a1: Action, a2: Action, r1: float, r2: float) -> str:
    """One dump line per step: post-step state hash, actions, rewards."""
    return f"{state_hash(state)} {int(a1)} {int(a2)} {r1!r} {r2!r}"
