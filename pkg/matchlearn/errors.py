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

"""
Exception types raised by matchlearn.
"""


class MatchlearnError(Exception):
    pass


class InvalidArgumentError(MatchlearnError, ValueError):
    pass


class BranchAmbiguityError(MatchlearnError):
    """The principal matrix logarithm is not defined (an eigenangle sits at pi)."""


class RankDeficiencyError(MatchlearnError):
    pass


class DenseLimitError(MatchlearnError):
    """A 2^n-dimensional object was requested above the configured dense limit."""


class NotGaussianError(MatchlearnError):
    pass


class InconsistentActionError(MatchlearnError):
    """A conjugation action is too far from any unitary conjugation to be reconstructed."""


class InconsistentRecursionError(MatchlearnError):
    def __init__(self, message: str, diagnostics: dict = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DegenerateEstimateError(MatchlearnError):
    pass


class InternalConsistencyError(MatchlearnError):
    pass


class DepthLimitError(MatchlearnError):
    pass


class ConfigError(MatchlearnError):
    pass


class ClippedCorrelationWarning(UserWarning):
    """Correlation estimates had singular values >= 1 and were clipped before inversion."""
