"""Quantum and simulated annealing on a corrugated harmonic potential."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
