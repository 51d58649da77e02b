"""Optimal control of travelling fronts."""

from ._core import *  # noqa: F401,F403
from ._core import FrontctrlError, __version__  # noqa: F401
