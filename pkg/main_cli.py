# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Command-line entry point.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
import os
import sys
from pathlib import Path
from dotenv import load_dotenv

# Load log level and default output directory as environment variables (before other project imports)
load_dotenv(Path(".env"))

from config.global_constants import ENV_LOG_LEVEL
from src.harness.cli import cli


def main():

    level_name = os.getenv(ENV_LOG_LEVEL, "INFO").upper()
    level = logging.getLevelNamesMapping().get(level_name, logging.INFO)

    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
