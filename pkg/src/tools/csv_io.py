# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

CSV helpers. Floats are written with 17 significant digits so files read back bit-exactly and reruns
with the same seed produce byte-identical files.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import csv
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from config.global_constants import FLOAT_FORMAT


def format_cell(value: Any) -> str:

    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"

    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)

    if isinstance(value, (int, np.integer)):
        return str(int(value))

    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, 'w', encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(value) for value in row])

    return path


def read_csv(path: Path) -> List[Dict[str, str]]:

    with open(Path(path), 'r', encoding="utf-8", newline="") as file:
        return list(csv.DictReader(file))


def read_csv_array(path: Path, columns: Sequence[str]) -> np.ndarray:
    """Read the given numeric columns into an (n, len(columns)) float array."""

    rows = read_csv(path)

    if len(rows) == 0:
        return np.zeros((0, len(columns)))

    return np.array([[float(row[column]) for column in columns] for row in rows], dtype=float)
