# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Reading and writing of the plain-text "key = value" configuration format. Lines starting with "#" are
comments. Values are converted into int, float, bool, comma-separated lists or strings.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import hashlib
from pathlib import Path
from typing import Any, Dict, List

from config.global_constants import FLOAT_FORMAT
from src.tools.custom_errors import ConfigError


def _convert_scalar(token: str) -> Any:

    lowered = token.lower()

    if lowered == "true":
        return True
    if lowered == "false":
        return False

    try:
        return int(token)
    except ValueError:
        pass

    try:
        return float(token)
    except ValueError:
        return token


def convert_value(raw_value: str) -> Any:
    """
    Convert the right-hand side of a config line. A value containing a comma is a list, every element is
    converted on its own. A trailing comma forces a one-element list.
    """

    raw_value = raw_value.strip()

    if "," in raw_value:
        return [_convert_scalar(token.strip()) for token in raw_value.split(",") if len(token.strip()) > 0]

    return _convert_scalar(raw_value)


def parse_kv_text(text: str, source: str = "<string>") -> Dict[str, Any]:

    config_dict = {}
    wrong_lines = []

    for line_number, line in enumerate(text.splitlines(), start=1):

        stripped = line.strip()

        if len(stripped) == 0 or stripped.startswith("#"):
            continue

        if "=" not in stripped:
            wrong_lines.append(f"{source}:{line_number}")
            continue

        key, value = stripped.split("=", 1)
        key = key.strip()

        if len(key) == 0:
            wrong_lines.append(f"{source}:{line_number}")
            continue

        config_dict[key] = convert_value(value)

    if len(wrong_lines) > 0:
        raise ConfigError(f"Malformed lines in {source} (expected 'key = value')", list_wrong_keys=wrong_lines)

    return config_dict


def load_kv_file(path: Path) -> Dict[str, Any]:

    path = Path(path)

    if not path.is_file():
        raise ConfigError(f"Config file {path} does not exist.")

    with open(path, 'r', encoding="utf-8") as file:
        return parse_kv_text(file.read(), source=str(path))


def format_value(value: Any) -> str:

    if isinstance(value, bool):
        return "true" if value else "false"

    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)

    if isinstance(value, (list, tuple)):
        # Keep the comma so a single element reads back as a list
        items = [format_value(item) for item in value]
        return ", ".join(items) + ("," if len(items) == 1 else "")

    return str(value)


def dump_kv_text(config_dict: Dict[str, Any], header_comments: List[str] = None) -> str:

    lines = [f"# {comment}" for comment in (header_comments or [])]
    lines.extend(f"{key} = {format_value(value)}" for key, value in config_dict.items())

    return "\n".join(lines) + "\n"


def save_kv_file(path: Path, config_dict: Dict[str, Any], header_comments: List[str] = None) -> None:

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, 'w', encoding="utf-8", newline="\n") as file:
        file.write(dump_kv_text(config_dict, header_comments))


def config_hash(config_dict: Dict[str, Any]) -> str:
    """Hash of the canonical (key-sorted) text rendering of a config."""

    canonical = dump_kv_text({key: config_dict[key] for key in sorted(config_dict)})
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
