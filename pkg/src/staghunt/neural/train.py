"""Batched episodic Reinforce with RMSProp for the grid policy network."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from staghunt.neural.layers import log_softmax, softmax
from staghunt.neural.net import ConvPolicyNet


@dataclass
class RMSPropState:
    """Squared-gradient accumulator per parameter tensor."""

    sq: dict[str, np.ndarray]
    lr: float = 1e-3
    decay: float = 0.99
    eps: float = 1e-8

    @classmethod
    def for_net(cls, net: ConvPolicyNet, lr: float = 1e-3, decay: float = 0.99) -> "RMSPropState":
        return cls(sq={k: np.zeros_like(v) for k, v in net.params.items()}, lr=lr, decay=decay)

    def apply(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for key, grad in grads.items():
            acc = self.decay * self.sq[key] + (1.0 - self.decay) * grad * grad
            self.sq[key] = acc
            params[key] = params[key] - self.lr * grad / (np.sqrt(acc) + self.eps)


@dataclass(frozen=True)
class TrainSpec:
    """Episodic training knobs; batch and discount follow the defaults used
    for every grid game, entropy regularization only for the Stag Hunt."""

    batch_episodes: int = 64
    discount: float = 0.99
    entropy_weight: float = 0.0
    total_episodes: int = 20_000

    def __post_init__(self):
        if self.batch_episodes < 1:
            raise ValueError("batch_episodes must be >= 1")
        if not (0.0 < self.discount <= 1.0):
            raise ValueError("discount must be in (0, 1]")


def discounted_returns(rewards, discount: float) -> np.ndarray:
    """Return-to-go at every step of one episode."""
    out = np.zeros(len(rewards))
    acc = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acc = rewards[i] + discount * acc
        out[i] = acc
    return out


def reinforce_loss_grad(logits: np.ndarray, actions: np.ndarray, returns: np.ndarray,
                        entropy_weight: float) -> tuple[float, np.ndarray]:
    """Loss -mean(log pi(a)*G) - w*mean(H) and its gradient in the logits."""
    n = logits.shape[0]
    probs = softmax(logits)
    logp = log_softmax(logits)
    picked = logp[np.arange(n), actions]
    entropy = -(probs * logp).sum(axis=1)
    loss = -(picked * returns).mean() - entropy_weight * entropy.mean()

    dlogits = probs * returns[:, None]
    dlogits[np.arange(n), actions] -= returns
    if entropy_weight:
        dlogits += entropy_weight * probs * (logp + entropy[:, None])
    return float(loss), dlogits / n


def reinforce_batch_update(net: ConvPolicyNet, episodes, spec: TrainSpec,
                           opt: RMSPropState) -> float:
    """One RMSProp step on a batch of episodes; returns the loss.

    Each episode is a sequence of (observation, action, mixed reward)
    steps. Empty episodes are skipped, so they never dilute the step mean.
    The forward pass runs in train mode: batch statistics over every step
    in the batch.
    """
    observations, actions, returns = [], [], []
    for episode in episodes:
        if not episode:
            continue
        rewards = [r for _, _, r in episode]
        for (obs, action, _), ret in zip(episode, discounted_returns(rewards, spec.discount)):
            observations.append(obs)
            actions.append(action)
            returns.append(ret)
    if not observations:
        raise ValueError("reinforce_batch_update needs at least one non-empty episode")
    logits = net.forward(np.stack(observations), train=True)
    loss, dlogits = reinforce_loss_grad(
        logits, np.asarray(actions), np.asarray(returns), spec.entropy_weight
    )
    if not np.isfinite(loss):
        raise FloatingPointError(f"non-finite loss {loss}")
    grads = net.backward(dlogits)
    opt.apply(net.params, grads)
    return loss


def sample_actions(net: ConvPolicyNet, observations: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """Eval-mode action draw for a batch of observations, one uniform each."""
    logits = net.forward(observations, train=False)
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("non-finite logits during rollout")
    probs = softmax(logits)
    cdf = probs.cumsum(axis=1)
    u = rng.random(size=probs.shape[0])
    return np.minimum((cdf < u[:, None]).sum(axis=1), probs.shape[1] - 1)
