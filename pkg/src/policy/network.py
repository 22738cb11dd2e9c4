# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

The steering policy: a feed-forward network 5 -> 64 -> 64 -> 1 with tanh hidden layers and a linear output,
its MSE loss and the analytic gradient (hand-written backpropagation, double precision).

Parameters live in one flat vector. Flatten order, layer by layer: the weight matrix W of shape
(fan_in, fan_out) in row-major order, then the bias vector of length fan_out. A layer computes
z = a_prev @ W + b.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from config.global_constants import POLICY_LAYER_DIMS
from src.policy.normalizer import Normalizer
from src.policy.sample import STATE_DIM, Sample, SampleBatch, as_batch
from src.tools.custom_errors import EmptyBatchError, LengthMismatchError, PolicyError

BatchLike = Union[SampleBatch, Sequence[Sample]]


def parameter_count(layer_dims: Sequence[int]) -> int:
    return int(sum(fan_in * fan_out + fan_out for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:])))


@dataclass(frozen=True, eq=False)
class GradientVector:
    """Flat gradient in the parameter flatten order of the network it belongs to."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def parameter_count(self) -> int:
        return int(self.values.size)

    def dot(self, other: "GradientVector") -> float:
        if other.parameter_count != self.parameter_count:
            raise LengthMismatchError(f"Gradient lengths differ: {self.parameter_count} != {other.parameter_count}")
        return float(self.values @ other.values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


class PolicyNet:

    def __init__(self, layer_dims: Sequence[int] = POLICY_LAYER_DIMS, params: np.ndarray = None):

        layer_dims = tuple(int(dim) for dim in layer_dims)

        if len(layer_dims) < 2 or layer_dims[0] != STATE_DIM or layer_dims[-1] != 1 or min(layer_dims) < 1:
            raise PolicyError(f"Layer dims must run from {STATE_DIM} inputs to 1 output, got {layer_dims}")

        self._layer_dims = layer_dims
        self._params = np.zeros(parameter_count(layer_dims))

        if params is not None:
            self.set_params(params)

    @classmethod
    def initialize(cls, rng: np.random.Generator, layer_dims: Sequence[int] = POLICY_LAYER_DIMS) -> "PolicyNet":
        """Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero."""

        net = cls(layer_dims)
        blocks = []

        for fan_in, fan_out in zip(net.layer_dims[:-1], net.layer_dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            blocks.append(rng.uniform(-limit, limit, size=fan_in * fan_out))
            blocks.append(np.zeros(fan_out))

        net.set_params(np.concatenate(blocks))
        return net

    @property
    def layer_dims(self) -> Tuple[int, ...]:
        return self._layer_dims

    @property
    def parameter_count(self) -> int:
        return int(self._params.size)

    @property
    def params(self) -> np.ndarray:
        """Read-only view on the flat parameter vector."""
        view = self._params.view()
        view.flags.writeable = False
        return view

    def set_params(self, params: np.ndarray) -> None:

        params = np.asarray(params, dtype=float).reshape(-1)

        if params.size != self._params.size:
            raise LengthMismatchError(f"Expected {self._params.size} parameters, got {params.size}")

        if not np.all(np.isfinite(params)):
            raise PolicyError("Network parameters must be finite")

        self._params = params.copy()

    def flatten(self) -> np.ndarray:
        return self._params.copy()

    def copy(self) -> "PolicyNet":
        return PolicyNet(self._layer_dims, self._params)

    def layers(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(W, b) views into the flat parameter vector."""

        layers = []
        offset = 0

        for fan_in, fan_out in zip(self._layer_dims[:-1], self._layer_dims[1:]):
            weights = self._params[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out)
            offset += fan_in * fan_out
            bias = self._params[offset:offset + fan_out]
            offset += fan_out
            layers.append((weights, bias))

        return layers


def _forward_pass(net: PolicyNet, inputs: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:

    activations = [inputs]
    layers = net.layers()

    for weights, bias in layers[:-1]:
        activations.append(np.tanh(activations[-1] @ weights + bias))

    weights, bias = layers[-1]
    output = (activations[-1] @ weights + bias)[:, 0]

    return output, activations


def forward_batch(net: PolicyNet, norm: Normalizer, states: np.ndarray) -> np.ndarray:
    inputs = norm.apply(np.asarray(states, dtype=float).reshape(-1, STATE_DIM))
    return _forward_pass(net, inputs)[0]


def forward(net: PolicyNet, norm: Normalizer, s: Sequence[float]) -> float:
    """Raw (unclamped) steering output for one state."""
    return float(forward_batch(net, norm, s)[0])


def mse_loss(net: PolicyNet, norm: Normalizer, batch: BatchLike) -> float:
    """
    :raises EmptyBatchError: If the batch is empty.
    """

    batch = as_batch(batch)

    if len(batch) == 0:
        raise EmptyBatchError("MSE of an empty batch")

    residual = forward_batch(net, norm, batch.states) - batch.actions
    return float(np.mean(residual * residual))


def backward(net: PolicyNet, norm: Normalizer, batch: BatchLike) -> Tuple[float, GradientVector]:
    """
    MSE loss and its exact gradient with respect to all parameters, in flatten order.

    :raises EmptyBatchError: If the batch is empty.
    """

    batch = as_batch(batch)
    n = len(batch)

    if n == 0:
        raise EmptyBatchError("Gradient of an empty batch")

    output, activations = _forward_pass(net, norm.apply(batch.states))
    residual = output - batch.actions
    loss = float(np.mean(residual * residual))

    layers = net.layers()
    blocks = []

    # dL/dz of the output layer
    delta = (2.0 / n * residual)[:, None]

    for index in range(len(layers) - 1, -1, -1):

        weights, _ = layers[index]
        blocks.append(delta.sum(axis=0))
        blocks.append((activations[index].T @ delta).ravel())

        if index > 0:
            delta = (delta @ weights.T) * (1.0 - activations[index] ** 2)

    # blocks were collected output layer first, bias before weights
    gradient = np.concatenate(blocks[::-1])

    return loss, GradientVector(gradient)
