# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

All randomness flows from one root seed. Each component (collection, init, shuffle, memory, split) gets
its own generator derived from the root seed and a stable key.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import hashlib

import numpy as np

COMPONENT_COLLECTION = "collection"
COMPONENT_INIT = "init"
COMPONENT_SHUFFLE = "shuffle"
COMPONENT_MEMORY = "memory"
COMPONENT_SPLIT = "split"
COMPONENT_TRACK = "track"


def _stable_int(key) -> int:

    # Python's hash() is salted per process, sha256 is not
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed_sequence(root_seed: int, component: str, *keys) -> np.random.SeedSequence:
    entropy = [int(root_seed) & 0xFFFFFFFFFFFFFFFF, _stable_int(component)] + [_stable_int(key) for key in keys]
    return np.random.SeedSequence(entropy)


def derive_rng(root_seed: int, component: str, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed_sequence(root_seed, component, *keys))


def derive_int_seed(root_seed: int, component: str, *keys) -> int:
    return int(derive_seed_sequence(root_seed, component, *keys).generate_state(1, dtype=np.uint32)[0])
