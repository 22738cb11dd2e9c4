# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

The compared learning methods: plain sequential training (non_ll), gradient projection against a randomly
sampled memory (ll_no_me) and gradient projection against the curated memory (ll_me).

Last modification: 18.10.2026
"""

__version__ = "2"
__author__ = "lifetrack developers"

from enum import Enum

from src.tools.custom_errors import ConfigError


class LearningMethod(Enum):
    NON_LL = "non_ll"
    LL_NO_ME = "ll_no_me"
    LL_ME = "ll_me"

    @classmethod
    def from_str(cls, name: str):
        for method in list(cls):
            if method.value == name.lower():
                return method
        raise ConfigError(f"Unknown learning method '{name}', expected one of: "
                          f"{', '.join(method.value for method in cls)}", list_wrong_keys=["methods"])

    @property
    def uses_memory(self) -> bool:
        return self != LearningMethod.NON_LL
