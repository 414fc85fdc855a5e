"""qslkit: counterdiabatic Landau-Zener driving and s-parameterized quantum speed limits."""

__version__ = "0.1.0"

from .metrics import NEG_INF  # noqa: E402
from .tomography import EXACT  # noqa: E402

__all__ = ["EXACT", "NEG_INF", "__version__"]
