"""Independent policy-gradient learners for strategic-form games.

Each agent holds a tabular softmax policy over its action set and updates
it after every batch of (one-step or short) episodes with a Reinforce
gradient estimate fed through Adam. Prosociality enters purely through the
reward mixer: the learning signal becomes a convex combination of the
agent's own reward and an aggregate of everyone else's, while recorded
payoffs stay raw.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Episode = list[tuple[int, float]]  # (action index, mixed reward) per step


class SoftmaxPolicy:
    """Tabular policy: action probabilities are the softmax of free logits."""

    def __init__(self, logits):
        logits = np.asarray(logits, dtype=float).copy()
        if logits.ndim != 1 or logits.size < 2:
            raise ValueError("logits must be a vector with at least two actions")
        if not np.all(np.isfinite(logits)):
            raise ValueError("logits must be finite")
        self.logits = logits

    @property
    def n_actions(self) -> int:
        return self.logits.size

    def action_probabilities(self) -> np.ndarray:
        shifted = self.logits - self.logits.max()
        exp = np.exp(shifted)
        return exp / exp.sum()

    @classmethod
    def random_init(cls, n_actions: int, rng: np.random.Generator, sigma: float = 1.0) -> "SoftmaxPolicy":
        """Fresh policy with i.i.d. normal logits, the per-replicate init."""
        return cls(rng.normal(0.0, sigma, size=n_actions))


@dataclass
class AdamState:
    """Adam accumulator for one logit vector."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_policy(cls, policy: SoftmaxPolicy, lr: float = 0.01) -> "AdamState":
        n = policy.n_actions
        return cls(m=np.zeros(n), v=np.zeros(n), lr=lr)

    def apply(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """One descent step on ``params`` for minimization gradient ``grad``."""
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True)
class RewardMixer:
    """Blend of own reward with an aggregate of the other agents' rewards.

    mode "average" weighs own reward against the mean of everyone else's;
    "sum" uses their total instead.
    """

    alpha: float
    mode: str = "average"

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.mode not in ("average", "sum"):
            raise ValueError(f"mode must be 'average' or 'sum', got {self.mode!r}")


def mix_rewards(mixer: RewardMixer, own: float, others: list[float]) -> float:
    """(1-alpha)*own + alpha*aggregate(others); others must be non-empty."""
    if len(others) == 0:
        raise ValueError("mix_rewards requires at least one other agent's reward")
    aggregate = sum(others) / len(others) if mixer.mode == "average" else sum(others)
    return (1.0 - mixer.alpha) * own + mixer.alpha * aggregate


def sample_action(policy: SoftmaxPolicy, rng: np.random.Generator) -> int:
    """Draw one action from the softmax distribution.

    Non-finite logits mean training has diverged and raise immediately.
    Sampling inverts the CDF against a single uniform draw, so the stream
    consumption per call is fixed.
    """
    if not np.all(np.isfinite(policy.logits)):
        raise FloatingPointError(f"non-finite logits: {policy.logits}")
    probs = policy.action_probabilities()
    u = rng.random()
    return int(min(np.searchsorted(np.cumsum(probs), u), policy.n_actions - 1))


def policy_gradient(policy: SoftmaxPolicy, episodes: list[Episode], discount: float = 1.0,
                    baseline: bool = False) -> np.ndarray:
    """Reinforce estimate of d/dlogits of the expected-return surrogate.

    The surrogate is mean over recorded steps of log pi(a_t) * G_t with G_t
    the discounted return-to-go of the (already mixed) rewards. Returns the
    ascent gradient; empty episodes are excluded from the mean.
    """
    steps: list[tuple[int, float]] = []
    for ep in episodes:
        if not ep:
            continue
        rewards_to_go = _returns_to_go([r for _, r in ep], discount)
        steps.extend((a, g) for (a, _), g in zip(ep, rewards_to_go))
    if not steps:
        raise ValueError("policy_gradient requires at least one recorded step")
    probs = policy.action_probabilities()
    grad = np.zeros_like(policy.logits)
    returns = np.array([g for _, g in steps])
    if baseline:
        returns = returns - returns.mean()
    for (action, _), g in zip(steps, returns):
        grad[action] += g
        grad -= probs * g
    return grad / len(steps)


def _returns_to_go(rewards: list[float], discount: float) -> list[float]:
    out = [0.0] * len(rewards)
    acc = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acc = rewards[i] + discount * acc
        out[i] = acc
    return out


def reinforce_update(policy: SoftmaxPolicy, episodes: list[Episode], adam: AdamState,
                     discount: float = 1.0, baseline: bool = False) -> SoftmaxPolicy:
    """One Adam step on the batch gradient; mutates and returns the policy."""
    if not episodes:
        raise ValueError("reinforce_update requires a non-empty batch")
    grad = policy_gradient(policy, episodes, discount=discount, baseline=baseline)
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError(f"non-finite policy gradient: {grad}")
    policy.logits = adam.apply(policy.logits, -grad)
    return policy
