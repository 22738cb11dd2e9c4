# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Definition of global constants.

Last modification: 18.10.2026
"""

__version__ = "2"
__author__ = "lifetrack developers"

from pathlib import Path

# -- Geometry --
DEFAULT_PATH_DS = 0.1                   # resample spacing [m]
DEFAULT_LOOKAHEAD = 2.0                 # preview distance [m]
DEFAULT_WAYPOINT_SPACING = 5.0          # spacing of generated track waypoints [m]
DEFAULT_KAPPA_MAX = 0.2                 # curvature bound of generated tracks [1/m]
ARC_LENGTH_TOLERANCE = 1e-6             # arc-length integration tolerance [m]

# -- Vehicle --
DEFAULT_CONTROL_DT = 0.05               # control period [s]
DEFAULT_SUBSTEPS = 5                    # RK4 substeps per control period
DEFAULT_VX_LAG_TAU = 0.5                # longitudinal first-order lag [s]
LOW_SPEED_VX = 0.5                      # slip-angle regularization speed [m/s]
BLOWUP_MAGNITUDE = 1e6
MAX_VX_REF = 40.0

# -- Experts --
QP_DEFAULT_TOLERANCE = 1e-9
QP_DEFAULT_MAX_ITER = 200

# -- Experience --
MIN_COLLECTION_VELOCITY = 3.0
MAX_COLLECTION_VELOCITY = 15.0
DEFAULT_FAILURE_DEVIATION = 1.0         # episode failure threshold [m]
DEFAULT_ABORT_DEVIATION = 5.0           # closed-loop abort threshold [m]
DEFAULT_TRAIN_FRACTION = 0.8
DEFAULT_START_OFFSET = 0.5              # max lateral start offset of repeated episodes [m]

# -- Policy --
POLICY_FILE_HEADER = "lifetrack-policy v1"
POLICY_LAYER_DIMS = (5, 64, 64, 1)
NORMALIZER_SCALE_FLOOR = 1e-8

# -- Continual learning --
DEFAULT_ETA = 0.25
DEFAULT_MEMORY_BATCH_SIZE = 256
DEFAULT_RESERVOIR_PER_TASK = 200
DEFAULT_EPOCHS = 50
DEFAULT_BATCH_SIZE = 64
DEFAULT_LEARNING_RATE = 1e-3
PROJECTION_ZERO_NORM = 1e-12
PROJECTION_SLACK = 1e-9
MEMORY_LOSS_SLACK = 0.02                # relative growth of the memory loss tolerated within one task
MEMORY_LOSS_FLOOR = 1e-12               # absolute tolerance for an (almost) zero memory loss
MAX_STEP_HALVINGS = 6

# -- Harness --
DEFAULT_EVAL_VELOCITY = 10.0
DEFAULT_TEST_SECTION = "S1"
DEFAULT_OUT_DIR = Path("results")
FLOAT_FORMAT = ".17g"
MANIFEST_FILE_NAME = "manifest.txt"

# -- Environment (.env) --
ENV_LOG_LEVEL = "LIFETRACK_LOG_LEVEL"
ENV_OUT_DIR = "LIFETRACK_OUT_DIR"

PATH_DEFAULT_DATA_JSON = Path(__file__).resolve().parent.parent / "data" / "json"
PATH_EXPERIMENT_CONFIG_SCHEMA = PATH_DEFAULT_DATA_JSON / "experiment_config_schema.json"
PATH_VEHICLE_PARAMS_SCHEMA = PATH_DEFAULT_DATA_JSON / "vehicle_params_schema.json"
PATH_MPC_CONFIG_SCHEMA = PATH_DEFAULT_DATA_JSON / "mpc_config_schema.json"
PATH_TRACK_SPEC_SCHEMA = PATH_DEFAULT_DATA_JSON / "track_spec_schema.json"
PATH_MINIMAL_EXPERIMENT_CONFIG = PATH_DEFAULT_DATA_JSON.parent / "configs" / "minimal.cfg"
PATH_DESK_EXPERIMENT_CONFIG = PATH_DEFAULT_DATA_JSON.parent / "configs" / "desk.cfg"
