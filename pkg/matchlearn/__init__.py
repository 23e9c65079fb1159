#!/usr/bin/env python
# coding: utf-8

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

from ._version import __version__
from .blackbox import GibbsStateSource, UnitaryOracle
from .dense_oracle import DenseUnitary, distance_D, distance_Dplus, gaussian_unitary
from .errors import MatchlearnError
from .gaussian import AntisymmetricGenerator, MatchgateCircuit, OrthogonalMatrix, compile_to_givens, haar_orthogonal
from .learner import LearnConfig, LearnReport, learn_from_gibbs, learn_gaussian, learn_hierarchy
from .majorana import HermitianMonomial, MajoranaMonomial, PauliString
