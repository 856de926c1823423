"""
Django settings for the Landau-Zener verification toolkit.

The settings are split by concern and star-imported here, so any module in
this package can be overridden from the environment without touching the
others.
"""

from .base import *
from .database import *
from .cache import *
from .logs import *
from .numerics import *
