from . import operators  # noqa: F401
from .testing import ShiftOracle  # type: ignore # noqa: F401,F403
from .matrix import *  # noqa: F401,F403
from .graph import *  # noqa: F401,F403
from .gf2 import *  # noqa: F401,F403
from .lifting import *  # noqa: F401,F403
from .trapping import *  # noqa: F401,F403
from .ies import *  # noqa: F401,F403
from .decode import *  # noqa: F401,F403
from .sim import *  # noqa: F401,F403
from .datasets import *  # noqa: F401,F403
