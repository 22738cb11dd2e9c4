# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

SGD and Adam updates on the flat parameter vector.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple, Union

import numpy as np

from src.policy.network import GradientVector, PolicyNet
from src.tools.custom_errors import ConfigError, LengthMismatchError


class OptimizerMethod(Enum):
    SGD = "sgd"
    ADAM = "adam"

    @classmethod
    def from_str(cls, name: str):
        for method in list(cls):
            if method.value == name.lower():
                return method
        raise ConfigError(f"Unknown optimizer '{name}'", list_wrong_keys=["optimizer"])


@dataclass
class OptimizerState:

    method: OptimizerMethod = OptimizerMethod.ADAM
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    first_moment: np.ndarray = field(default=None, repr=False)
    second_moment: np.ndarray = field(default=None, repr=False)
    step: int = 0

    @classmethod
    def create(cls, net: PolicyNet, method: OptimizerMethod = OptimizerMethod.ADAM,
               learning_rate: float = 1e-3) -> "OptimizerState":
        return cls(method=method, learning_rate=learning_rate,
                   first_moment=np.zeros(net.parameter_count), second_moment=np.zeros(net.parameter_count))


def optimizer_update(net: PolicyNet, opt: OptimizerState, g: Union[GradientVector, np.ndarray]) -> np.ndarray:
    """
    Parameter increment of one optimizer step. Advances opt but leaves the network untouched, so the caller
    may rescale or project the increment before applying it.

    :raises LengthMismatchError: If the gradient length differs from the parameter count.
    """

    gradient = g.values if isinstance(g, GradientVector) else np.asarray(g, dtype=float).reshape(-1)

    if gradient.size != net.parameter_count:
        raise LengthMismatchError(f"Gradient has {gradient.size} entries, network has {net.parameter_count} parameters")

    if opt.method == OptimizerMethod.SGD:
        return -opt.learning_rate * gradient

    if opt.first_moment is None:
        opt.first_moment = np.zeros(net.parameter_count)
        opt.second_moment = np.zeros(net.parameter_count)

    opt.step += 1
    opt.first_moment = opt.beta1 * opt.first_moment + (1.0 - opt.beta1) * gradient
    opt.second_moment = opt.beta2 * opt.second_moment + (1.0 - opt.beta2) * gradient * gradient

    first_unbiased = opt.first_moment / (1.0 - opt.beta1 ** opt.step)
    second_unbiased = opt.second_moment / (1.0 - opt.beta2 ** opt.step)

    return -opt.learning_rate * first_unbiased / (np.sqrt(second_unbiased) + opt.epsilon)


def apply_gradient(net: PolicyNet, opt: OptimizerState,
                   g: Union[GradientVector, np.ndarray]) -> Tuple[PolicyNet, OptimizerState]:
    """
    One optimizer step, updating net and opt in place.

    :raises LengthMismatchError: If the gradient length differs from the parameter count.
    """

    net.set_params(net.params + optimizer_update(net, opt, g))

    return net, opt
