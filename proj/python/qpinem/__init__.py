"""Python bindings for the qpinem C++ core."""

from ._qpinem import *  # noqa: F401,F403
from ._qpinem import ConfigError, IoError, NumericalError

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "1.0.0"
