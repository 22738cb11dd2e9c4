# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

This class validates parsed configuration data (dictionaries) based on a predefined JSON schema.

Last modification: 18.10.2026
"""

__version__ = "2"
__author__ = "lifetrack developers"

import json
import logging
from pathlib import Path
from typing import Dict, List

from jsonschema import Draft7Validator

from src.tools.custom_errors import ConfigError

logger = logging.getLogger(__name__)


class JSONSchemaValidator:

    def __init__(self, json_schema_filepath: Path):

        try:

            with open(str(json_schema_filepath), 'r') as file:
                self.json_schema = json.load(file)

        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Error loading JSON schema {json_schema_filepath}: {e}")

        self._validator = Draft7Validator(self.json_schema)

    def collect_errors(self, json_data: Dict) -> List[str]:

        messages = []

        for error in sorted(self._validator.iter_errors(json_data), key=lambda e: list(e.path)):
            location = ".".join(str(part) for part in error.path) or "<root>"
            messages.append(f"{location}: {error.message}")

        return messages

    def is_valid_json_data(self, json_data: Dict) -> bool:
        return len(self.collect_errors(json_data)) == 0

    def validate(self, json_data: Dict, source: str = "config") -> None:
        """
        Validate data against the schema.

        :param json_data: Parsed configuration as dictionary.
        :param source: Name used in the error message (f.e. the file path).
        :return: None.

        :raises ConfigError: If the data violates the schema; the offending keys are listed.
        """

        errors = self.collect_errors(json_data)

        if len(errors) > 0:
            for error in errors:
                logger.error(f"{source}: {error}")
            raise ConfigError(f"{source} is not valid against its schema.", list_wrong_keys=errors)

        logger.debug(f"{source} is valid against the schema.")
