"""Chain kernel backends.

The compiled extension is used when it imports; otherwise the pure-Python
implementation is used.  Set ``ASMCMC_BACKEND=python`` to force the
fallback (e.g. to cross-check results).
"""

import os

from . import _pykernel as python_backend

try:
    from . import _ckernel as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("ASMCMC_BACKEND", "").lower() != "python":
    backend = compiled_backend
    BACKEND = "compiled"
else:
    backend = python_backend
    BACKEND = "python"

GAUSSIAN = python_backend.GAUSSIAN
EXPONENTIAL_POWER = python_backend.EXPONENTIAL_POWER
UNIFORM_BALL = python_backend.UNIFORM_BALL
UNIFORM_BOX = python_backend.UNIFORM_BOX
SMOOTH_BUMP = python_backend.SMOOTH_BUMP
PHI_EXP = python_backend.PHI_EXP
PHI_SOFTPLUS_POWER = python_backend.PHI_SOFTPLUS_POWER


def get_backend(name=None):
    """Return the kernel module called ``name`` ("compiled"/"python") or the default."""
    if name is None:
        return backend
    if name == "python":
        return python_backend
    if name == "compiled":
        if compiled_backend is None:
            raise ImportError("compiled kernel is not built")
        return compiled_backend
    raise ValueError(f"unknown backend {name!r}")
