"""Predict lower-limb joint curves from upper-limb gait features."""

from ._limbmap import *  # noqa: F403
from ._limbmap import LimbmapError, __doc__  # noqa: F401
