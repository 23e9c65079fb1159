# matchlearn - Learning Matchgate Hierarchy operations from black-box access
# Copyright (C) 2026 The matchlearn developers
# 
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 3 of the License, or
# (at your option) any later version.
# 
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
# 
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

import os
import sys
import time

import psutil

_verbose = False


def set_verbose(verbose: bool) -> None:
    global _verbose
    _verbose = bool(verbose)


def is_verbose() -> bool:
    return _verbose


def log(message: str) -> None:
    """Progress output on stderr; stdout is reserved for JSON results."""
    if _verbose:
        print(message, file=sys.stderr, flush=True)


def current_memory_usage_mb() -> float:
    return round(psutil.Process(os.getpid()).memory_info().rss / 1024 ** 2, 2)


def print_current_memory_usage(s: str = "") -> None:
    log(f"        > [{s}] Current memory usage: {current_memory_usage_mb()} MB")


class PerformanceTimer:
    def __init__(self) -> None:
        self.started = time.perf_counter()
        self.time_elapsed_since_last_call = self.started

    def reset_time_elapsed_since_last_call(self) -> None:
        self.time_elapsed_since_last_call = time.perf_counter()

    def seconds_since_start(self) -> float:
        return time.perf_counter() - self.started

    def print_time_elapsed_since_last_call(self, s: str = "") -> float:
        now = time.perf_counter()
        elapsed = now - self.time_elapsed_since_last_call
        log(f"        > [{s}] Time elapsed since last call: {round(elapsed, 3)} s")
        self.time_elapsed_since_last_call = now
        return elapsed
