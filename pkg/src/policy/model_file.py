# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Versioned text format of a trained policy:

    lifetrack-policy v1
    dims 5 64 64 1
    shift <5 values>
    scale <5 values>
    params <count>
    <one parameter per line, flatten order>

Floats are written with 17 significant digits, so loading restores every value exactly.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

from pathlib import Path
from typing import List, Tuple

import numpy as np

from config.global_constants import FLOAT_FORMAT, POLICY_FILE_HEADER
from src.policy.network import PolicyNet
from src.policy.normalizer import Normalizer
from src.tools.custom_errors import ModelFileError, PolicyError


def _format(values) -> str:
    return " ".join(format(float(value), FLOAT_FORMAT) for value in values)


def save_policy(path: Path, net: PolicyNet, norm: Normalizer) -> Path:

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    lines = [POLICY_FILE_HEADER,
             "dims " + " ".join(str(dim) for dim in net.layer_dims),
             "shift " + _format(norm.shift),
             "scale " + _format(norm.scale),
             f"params {net.parameter_count}"]
    lines.extend(format(float(value), FLOAT_FORMAT) for value in net.params)

    with open(path, 'w', encoding="utf-8", newline="\n") as file:
        file.write("\n".join(lines) + "\n")

    return path


def _expect_field(line: str, key: str, path: Path) -> List[str]:

    tokens = line.split()

    if len(tokens) == 0 or tokens[0] != key:
        raise ModelFileError(f"{path}: expected '{key} ...', got '{line.strip()}'")

    return tokens[1:]


def load_policy(path: Path) -> Tuple[PolicyNet, Normalizer]:
    """
    :raises ModelFileError: On a missing file, an unknown header or malformed content.
    """

    path = Path(path)

    if not path.is_file():
        raise ModelFileError(f"Model file {path} does not exist")

    with open(path, 'r', encoding="utf-8") as file:
        lines = [line for line in file.read().splitlines() if len(line.strip()) > 0]

    if len(lines) < 5 or lines[0].strip() != POLICY_FILE_HEADER:
        raise ModelFileError(f"{path}: not a '{POLICY_FILE_HEADER}' model file")

    try:
        dims = [int(token) for token in _expect_field(lines[1], "dims", path)]
        shift = np.array([float(token) for token in _expect_field(lines[2], "shift", path)])
        scale = np.array([float(token) for token in _expect_field(lines[3], "scale", path)])
        count = int(_expect_field(lines[4], "params", path)[0])
        params = np.array([float(line) for line in lines[5:]])
    except (ValueError, IndexError) as e:
        raise ModelFileError(f"{path}: malformed model file ({e})")

    if params.size != count:
        raise ModelFileError(f"{path}: header announces {count} parameters, file holds {params.size}")

    try:
        net = PolicyNet(dims, params)
        norm = Normalizer(shift, scale)
    except PolicyError as e:
        raise ModelFileError(f"{path}: {e.message}")

    return net, norm
