# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Progress workers used by long-running stages (episode collection, task training). The ProgressWorker
drives a tqdm bar, the SilentWorker offers the same interface and does nothing.

Last modification: 18.10.2026
"""

__version__ = "3"
__author__ = "lifetrack developers"

from typing import Optional

from tqdm import tqdm


class ProgressWorker:

    def __init__(self, total: int, description: str = "", leave: bool = False):
        self._total = max(int(total), 0)
        self._percentage = 0
        self._text = description
        self._bar: Optional[tqdm] = None
        self._leave = leave

    @property
    def percentage(self) -> int:
        return self._percentage

    @percentage.setter
    def percentage(self, value: int):
        value = int(min(max(value, 0), 100))
        if self._percentage == value:
            return
        self._percentage = value

    @property
    def text(self) -> str:
        return self._text

    @text.setter
    def text(self, value: str):
        if self._text == value:
            return
        self._text = value
        if self._bar is not None:
            self._bar.set_description_str(value)

    def start(self) -> None:
        self._bar = tqdm(total=self._total, desc=self._text, leave=self._leave)

    def advance(self, steps: int = 1, postfix: str = "") -> None:

        if self._bar is None:
            self.start()

        self._bar.update(steps)

        if len(postfix) > 0:
            self._bar.set_postfix_str(postfix)

        if self._total > 0:
            self.percentage = round(100 * self._bar.n / self._total)

    def finish(self) -> None:
        if self._bar is not None:
            self._bar.close()
            self._bar = None
        self.percentage = 100


class SilentWorker:

    def start(self) -> None:
        pass

    def advance(self, steps: int = 1, postfix: str = "") -> None:
        pass

    def finish(self) -> None:
        pass

    @property
    def percentage(self) -> int:
        return 0

    @percentage.setter
    def percentage(self, value: int):
        pass

    @property
    def text(self) -> str:
        return ""

    @text.setter
    def text(self, value: str):
        pass


def make_worker(total: int, description: str, enabled: bool):
    if enabled:
        return ProgressWorker(total=total, description=description)
    return SilentWorker()
