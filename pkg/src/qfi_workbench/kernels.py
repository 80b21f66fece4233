"""Backend selection for the hot integration kernel.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``QFI_WORKBENCH_PURE`` is set to a non-empty value other
than ``0``, the pure-Python implementation is used.
"""

import os

from . import _simpson_py

OK = _simpson_py.OK
TOO_MANY_INTERVALS = _simpson_py.TOO_MANY_INTERVALS
DEPTH_EXCEEDED = _simpson_py.DEPTH_EXCEEDED

try:
    from . import _simpson_ext
except ImportError:  # extension not built
    _simpson_ext = None

_force_pure = os.environ.get("QFI_WORKBENCH_PURE", "") not in ("", "0")

if _simpson_ext is not None and not _force_pure:
    BACKEND = "cython"
    adaptive_simpson_phases = _simpson_ext.adaptive_simpson_phases
else:
    BACKEND = "python"
    adaptive_simpson_phases = _simpson_py.adaptive_simpson_phases

BACKENDS = {"python": _simpson_py.adaptive_simpson_phases}
if _simpson_ext is not None:
    BACKENDS["cython"] = _simpson_ext.adaptive_simpson_phases
