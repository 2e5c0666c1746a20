"""Minimal tensor layers with reverse-mode gradients, the conv policy
network, and batched Reinforce training with RMSProp."""

from staghunt.neural.net import ConvPolicyNet, load_checkpoint, save_checkpoint
from staghunt.neural.train import (
    RMSPropState,
    TrainSpec,
    discounted_returns,
    reinforce_batch_update,
    reinforce_loss_grad,
    sample_actions,
)

__all__ = [
    "ConvPolicyNet",
    "RMSPropState",
    "TrainSpec",
    "discounted_returns",
    "load_checkpoint",
    "reinforce_batch_update",
    "reinforce_loss_grad",
    "sample_actions",
    "save_checkpoint",
]
