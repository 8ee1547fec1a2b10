"""Numerical verification of generalized contact, complex and metric structures on coordinate charts."""
__version__ = "0.1.0"

from .fields import ChartSpec, Field, parse_field, eval_jet  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .structures import builtin, BUILTINS  # noqa: E402

__all__ = ["ChartSpec", "Field", "parse_field", "eval_jet", "BACKEND", "builtin", "BUILTINS", "__version__"]
