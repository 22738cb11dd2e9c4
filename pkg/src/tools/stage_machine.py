# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Stage machine representing the experiment pipeline. Every stage may only be entered from its
predecessor, the pipeline may re-enter a stage (f.e. when an arm is retrained) and may stop early.

Last modification: 18.10.2026
"""

__version__ = "2"
__author__ = "lifetrack developers"

import logging
from enum import Enum, auto
from typing import Dict, List, Set

from src.tools.custom_errors import IllegalStageTransitionError

logger = logging.getLogger(__name__)


class Stage(Enum):

    CONFIGURED = auto()
    TRACKS_READY = auto()
    EPISODES_COLLECTED = auto()
    TASKS_SEGMENTED = auto()
    NORMALIZER_FROZEN = auto()
    ARMS_TRAINED = auto()
    BASELINES_EVALUATED = auto()
    OUTPUTS_WRITTEN = auto()


_LEGAL_TRANSITIONS: Dict[Stage, Set[Stage]] = {
    Stage.CONFIGURED: {Stage.TRACKS_READY},
    Stage.TRACKS_READY: {Stage.EPISODES_COLLECTED, Stage.BASELINES_EVALUATED, Stage.OUTPUTS_WRITTEN},
    Stage.EPISODES_COLLECTED: {Stage.TASKS_SEGMENTED, Stage.OUTPUTS_WRITTEN},
    Stage.TASKS_SEGMENTED: {Stage.NORMALIZER_FROZEN, Stage.OUTPUTS_WRITTEN},
    Stage.NORMALIZER_FROZEN: {Stage.ARMS_TRAINED},
    Stage.ARMS_TRAINED: {Stage.ARMS_TRAINED, Stage.BASELINES_EVALUATED, Stage.OUTPUTS_WRITTEN},
    Stage.BASELINES_EVALUATED: {Stage.OUTPUTS_WRITTEN},
    Stage.OUTPUTS_WRITTEN: set(),
}


class StageMachine:

    def __init__(self):
        self.current_stage = Stage.CONFIGURED
        self.last_stage = Stage.CONFIGURED
        self._history: List[Stage] = [Stage.CONFIGURED]

    @property
    def history(self) -> List[Stage]:
        return list(self._history)

    def can_enter(self, new_stage: Stage) -> bool:
        return new_stage in _LEGAL_TRANSITIONS[self.current_stage]

    def set_stage(self, new_stage: Stage) -> None:

        if not self.can_enter(new_stage):
            raise IllegalStageTransitionError(f"Illegal stage transition: {self.current_stage.name} -> {new_stage.name}")

        self.last_stage = self.current_stage
        self.current_stage = new_stage
        self._history.append(new_stage)

        logger.info(f"-> Stage {new_stage.name}")
