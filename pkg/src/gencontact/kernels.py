"""Backend selection for the expression-program jet evaluator.

The compiled extension is used when it imports; otherwise the pure-Python
evaluator with the identical contract is used.  Both stay importable so the
benchmark and the differential tests can drive either one directly.
"""
from . import _jetcore_py

try:
    from . import _jetcore as _jetcore_ext
except ImportError:  # extension not built
    _jetcore_ext = None

BACKENDS = {"python": _jetcore_py.eval_program}
if _jetcore_ext is not None:
    BACKENDS["compiled"] = _jetcore_ext.eval_program

BACKEND = "compiled" if _jetcore_ext is not None else "python"
eval_program = BACKENDS[BACKEND]
