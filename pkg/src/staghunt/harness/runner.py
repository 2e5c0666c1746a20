"""Seeded replicate execution for every game family.

A replicate is the unit of parallelism: it owns its RNG (seeded base+id),
its learners, and its environment, so results are identical whatever the
worker count or scheduling order. Recorded rewards are always the raw game
payoffs; prosocial mixing only shapes the learning signal.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from staghunt import envs_markov
from staghunt.envs_strategic import NetworkGame, WeakLinkGame, dyad_step, graph_preset, network_step, weaklink_step
from staghunt.harness.config import MATRIX, NETWORK, WEAKLINK, ExperimentConfig
from staghunt.learners import AdamState, RewardMixer, SoftmaxPolicy, mix_rewards, reinforce_update, sample_action
from staghunt.matrix_games import HUNT, StagHuntPayoffs
from staghunt.neural import ConvPolicyNet, RMSPropState, TrainSpec, reinforce_batch_update, sample_actions

WORKERS_ENV_VAR = "STAGHUNT_WORKERS"

PAYOFF_DOMINANT = "payoff-dominant"
RISK_DOMINANT = "risk-dominant"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class BlockStats:
    """Aggregates over one contiguous block of rounds or episodes."""

    index: int
    mean_rewards: tuple
    coord_rate: float


@dataclass(frozen=True)
class ReplicateResult:
    replicate: int
    seed: int
    blocks: tuple
    label: str
    wall_time: float


@dataclass(frozen=True)
class ExperimentRun:
    config: ExperimentConfig
    results: tuple
    failures: tuple  # (replicate id, error message)

    @property
    def ok(self) -> bool:
        return not self.failures


def classify_convergence(coord_series, threshold: float = 0.5, window: int | None = None) -> str:
    """Label a run by its coordination rate over the final window.

    The threshold is inclusive: a final-window rate of exactly ``threshold``
    counts as payoff-dominant.
    """
    series = list(coord_series)
    if not series:
        return UNRESOLVED
    if window is None:
        window = min(50, len(series))
    tail = series[-window:]
    return PAYOFF_DOMINANT if float(np.mean(tail)) >= threshold else RISK_DOMINANT


def make_blocks(reward_series: np.ndarray, coord_series, block_size: int) -> tuple:
    """Chunk per-step series into block aggregates covering the whole run.

    ``reward_series`` has one row per step (round or episode) and one column
    per agent. The final block may be shorter when the run length is not a
    multiple of the block size.
    """
    n = reward_series.shape[0]
    coord = np.asarray(coord_series, dtype=float)
    blocks = []
    for index, start in enumerate(range(0, n, block_size)):
        stop = min(start + block_size, n)
        blocks.append(
            BlockStats(
                index=index,
                mean_rewards=tuple(float(x) for x in reward_series[start:stop].mean(axis=0)),
                coord_rate=float(coord[start:stop].mean()),
            )
        )
    return tuple(blocks)


def _strategic_replicate(cfg: ExperimentConfig, replicate: int) -> ReplicateResult:
    seed = cfg.base_seed + replicate
    rng = np.random.default_rng(seed)
    start = time.perf_counter()

    if cfg.game == MATRIX:
        payoffs = StagHuntPayoffs(cfg.h, cfg.c, cfg.m, cfg.g)
        n_agents, n_actions = 2, 2
        env_step = lambda actions: dyad_step(payoffs, actions[0], actions[1])
        coordinated = lambda actions: all(a == HUNT for a in actions)
    elif cfg.game == NETWORK:
        payoffs = StagHuntPayoffs(cfg.h, cfg.c, cfg.m, cfg.g)
        if cfg.adjacency:
            adjacency = np.array(cfg.adjacency, dtype=bool)
        else:
            adjacency = graph_preset(cfg.graph, cfg.n_agents)
        game = NetworkGame(adjacency, payoffs, cfg.aggregation)
        n_agents, n_actions = cfg.n_agents, 2
        env_step = lambda actions: network_step(game, actions)
        coordinated = lambda actions: all(a == HUNT for a in actions)
    elif cfg.game == WEAKLINK:
        game = WeakLinkGame(a=cfg.weaklink_a, n_players=cfg.n_agents, max_effort=cfg.max_effort)
        n_agents, n_actions = cfg.n_agents, cfg.max_effort + 1
        env_step = lambda actions: weaklink_step(game, actions)
        coordinated = lambda actions: min(actions) == cfg.max_effort
    else:
        raise ValueError(f"not a strategic-form game: {cfg.game}")

    policies = [SoftmaxPolicy.random_init(n_actions, rng, cfg.init_sigma) for _ in range(n_agents)]
    adams = [AdamState.for_policy(p, cfg.lr) for p in policies]
    mixers = [RewardMixer(alpha, cfg.mixer_mode) for alpha in cfg.alphas]

    rewards = np.zeros((cfg.rounds, n_agents))
    coords = np.zeros(cfg.rounds)
    for rnd in range(cfg.rounds):
        actions = [sample_action(p, rng) for p in policies]
        step_rewards = env_step(actions)
        rewards[rnd] = step_rewards
        coords[rnd] = 1.0 if coordinated(actions) else 0.0
        for i in range(n_agents):
            others = [float(step_rewards[j]) for j in range(n_agents) if j != i]
            mixed = mix_rewards(mixers[i], float(step_rewards[i]), others)
            reinforce_update(policies[i], [[(actions[i], mixed)]], adams[i], baseline=cfg.baseline)

    label = classify_convergence(coords, cfg.classify_threshold, window=min(50, cfg.rounds))
    return ReplicateResult(
        replicate=replicate,
        seed=seed,
        blocks=make_blocks(rewards, coords, cfg.block_size),
        label=label,
        wall_time=time.perf_counter() - start,
    )


def _markov_env_config(cfg: ExperimentConfig):
    if cfg.game == "stag_hunt":
        return envs_markov.StagHuntGridConfig(gore_penalty=cfg.gore_penalty)
    if cfg.game == "harvest":
        return envs_markov.HarvestConfig(young_fraction=cfg.young_fraction, spawn_prob=cfg.spawn_prob)
    return envs_markov.EscalationConfig(penalty_multiplier=cfg.penalty_multiplier)


def _episode_coord_rate(cfg: ExperimentConfig, counters: dict, steps: int) -> float:
    if cfg.game == "stag_hunt":
        return counters["captures"] / steps if steps else 0.0
    if cfg.game == "harvest":
        picks = counters["young_picks"] + counters["mature_picks"]
        return counters["mature_picks"] / picks if picks else 0.0
    return counters["joint_visits"] / steps if steps else 0.0


def _markov_replicate(cfg: ExperimentConfig, replicate: int) -> ReplicateResult:
    """Train one pair of conv policies on a grid game.

    Episodes run in lockstep cohorts of ``batch_episodes`` so that action
    selection is one batched forward per agent per step; each cohort then
    yields exactly one Reinforce update per agent. A shorter trailing cohort
    is still trained on.
    """
    seed = cfg.base_seed + replicate
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    env_cfg = _markov_env_config(cfg)
    nets = [
        ConvPolicyNet(envs_markov.N_CHANNELS, envs_markov.BOARD_SIZE, len(envs_markov.Action),
                      cfg.base_channels, rng)
        for _ in range(2)
    ]
    opts = [RMSPropState.for_net(net, lr=cfg.net_lr) for net in nets]
    spec = TrainSpec(
        batch_episodes=cfg.batch_episodes,
        discount=cfg.discount,
        entropy_weight=cfg.entropy_weight,
        total_episodes=cfg.episodes,
    )
    mixers = [RewardMixer(alpha, cfg.mixer_mode) for alpha in cfg.alphas]

    episode_rewards = np.zeros((cfg.episodes, 2))
    episode_coords = np.zeros(cfg.episodes)

    for cohort_start in range(0, cfg.episodes, cfg.batch_episodes):
        cohort = range(cohort_start, min(cohort_start + cfg.batch_episodes, cfg.episodes))
        states = []
        for _ in cohort:
            if cfg.game == "escalation":
                states.append(envs_markov.reset(cfg.game, env_cfg, rng))
            else:
                horizon = envs_markov.episode_length_sampler(cfg.episode_mean_length, rng)
                states.append(envs_markov.reset(cfg.game, env_cfg, rng, horizon=horizon))
        n = len(states)
        records = [[[] for _ in range(n)], [[] for _ in range(n)]]
        totals = np.zeros((n, 2))
        counters = [dict() for _ in range(n)]
        steps = np.zeros(n, dtype=int)
        active = list(range(n))
        while active:
            obs1 = np.stack([envs_markov.observe(states[k], 1) for k in active])
            obs2 = np.stack([envs_markov.observe(states[k], 2) for k in active])
            acts1 = sample_actions(nets[0], obs1, rng)
            acts2 = sample_actions(nets[1], obs2, rng)
            still_active = []
            for pos, k in enumerate(active):
                a1, a2 = int(acts1[pos]), int(acts2[pos])
                state, r1, r2, done = envs_markov.step(
                    states[k], envs_markov.Action(a1), envs_markov.Action(a2), rng
                )
                raw = (r1, r2)
                for i, (action, obs) in enumerate(((a1, obs1[pos]), (a2, obs2[pos]))):
                    mixed = mix_rewards(mixers[i], raw[i], [raw[1 - i]])
                    records[i][k].append((obs, action, mixed))
                totals[k] += raw
                for key, value in state.events.items():
                    if isinstance(value, (int, float)) and not isinstance(value, bool):
                        counters[k][key] = counters[k].get(key, 0) + value
                steps[k] += 1
                if not done:
                    still_active.append(k)
            active = still_active
        for k, episode in enumerate(cohort):
            episode_rewards[episode] = totals[k]
            episode_coords[episode] = _episode_coord_rate(cfg, counters[k], int(steps[k]))
        for i in range(2):
            reinforce_batch_update(nets[i], records[i], spec, opts[i])

    window = max(1, cfg.episodes // 10)
    label = classify_convergence(episode_coords, cfg.classify_threshold, window=window)
    return ReplicateResult(
        replicate=replicate,
        seed=seed,
        blocks=make_blocks(episode_rewards, episode_coords, cfg.block_size),
        label=label,
        wall_time=time.perf_counter() - start,
    )


def run_replicate(cfg: ExperimentConfig, replicate: int) -> ReplicateResult:
    if cfg.is_markov:
        return _markov_replicate(cfg, replicate)
    return _strategic_replicate(cfg, replicate)


def _worker(args) -> tuple:
    cfg, replicate = args
    try:
        return ("ok", run_replicate(cfg, replicate))
    except Exception as exc:  # report and keep the remaining replicates alive
        return ("error", (replicate, f"{type(exc).__name__}: {exc}"))


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKERS_ENV_VAR)
    return max(1, int(env)) if env else 1


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentRun:
    """Run every replicate and gather results sorted by replicate id.

    Replicate r always uses seed base_seed + r; outputs are byte-identical
    for any worker count. Failed replicates are collected, not fatal.
    """
    n_workers = resolve_workers(workers)
    jobs = [(cfg, r) for r in range(cfg.replicates)]
    if n_workers == 1 or cfg.replicates == 1:
        outcomes = [_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(_worker, jobs))
    results = sorted((r for status, r in outcomes if status == "ok"), key=lambda r: r.replicate)
    failures = sorted((f for status, f in outcomes if status == "error"), key=lambda f: f[0])
    return ExperimentRun(config=cfg, results=tuple(results), failures=tuple(failures))
