"""Backend selection for the hot kernels.

Every kernel ships twice: a numba ``@njit`` version and a pure-numpy
version.  ``RIPS_EULER_BACKEND=numpy`` forces the numpy path; the default is
numba when it imports, numpy otherwise.  The variable is read on every
dispatch so tests can flip it with ``monkeypatch.setenv``.
"""
from __future__ import annotations

import os

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


ENV_VAR = "RIPS_EULER_BACKEND"


def backend() -> str:
    """Return ``"numba"`` or ``"numpy"`` for the current process environment."""
    choice = os.environ.get(ENV_VAR, "").strip().lower()
    if choice in ("", "auto", "numba"):
        return "numba" if HAVE_NUMBA else "numpy"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")


def use_numba() -> bool:
    return backend() == "numba"
