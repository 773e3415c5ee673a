"""Taylor-expansion neural predictors and benchmark harness for univariate time series."""

from taycast._core import *  # noqa: F401,F403
from taycast._core import __version__  # noqa: F401
