from ._rdslab import *  # noqa: F401,F403
from ._rdslab import __version__  # noqa: F401
