"""Backend selection for the hot inner loops.

The compiled Cython module is preferred; the numpy fallback is used when it
is missing or when the environment variable ``FLUORTOA_PURE_PYTHON`` is set
to a non-empty value other than ``0``.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("FLUORTOA_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]
apply_potential = _impl.apply_potential
apply_phase = _impl.apply_phase
populations = _impl.populations
edge_density = _impl.edge_density
