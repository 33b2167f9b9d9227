"""Backend selection for the trajectory integrator.

``ESKIT_BACKEND`` picks the integration path:

* ``auto`` (default) -- compiled numba kernels when numba imports, else the
  pure-numpy integrator;
* ``numba`` -- require the compiled kernels, raise if numba is missing;
* ``numpy`` -- force the pure-numpy path (reference behaviour, also what
  user-defined costs always get).

The flag is read at call time so a single process can benchmark both paths.
"""

import os

from . import _kernels

ENV_VAR = "ESKIT_BACKEND"
_CHOICES = ("auto", "numba", "numpy")


def numba_available() -> bool:
    return _kernels.HAS_NUMBA


def use_numba() -> bool:
    """Whether integrate() should dispatch kernel-tagged systems to numba."""
    mode = os.environ.get(ENV_VAR, "auto").strip().lower()
    if mode not in _CHOICES:
        raise ValueError(f"{ENV_VAR}={mode!r}; expected one of {_CHOICES}")
    if mode == "numpy":
        return False
    if mode == "numba":
        if not _kernels.HAS_NUMBA:
            raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
        return True
    return _kernels.HAS_NUMBA


def backend_name() -> str:
    return "numba" if use_numba() else "numpy"
