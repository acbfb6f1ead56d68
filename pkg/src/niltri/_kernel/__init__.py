"""Backend selection for the orbit BFS kernel.

The compiled extension is preferred; the pure-Python twin is used when the
extension is missing (source checkout without a build) or when forced via
NILTRI_BACKEND=python.  Both expose the same functions over the same state
encoding, so callers never care which one is active.
"""

from __future__ import annotations

import os

from .moves import decode_move, f_move, p_move, q_move  # noqa: F401

_FORCED = os.environ.get("NILTRI_BACKEND", "").strip().lower()

if _FORCED == "python":
    from . import _orbits_py as _impl
elif _FORCED == "cython":
    from . import _orbits_cy as _impl  # ImportError here means: build the extension
else:
    try:
        from . import _orbits_cy as _impl
    except ImportError:
        from . import _orbits_py as _impl

BACKEND = "cython" if _impl.__name__.endswith("_cy") else "python"

STATE_CAP_DEFAULT = 1 << 24


class StateSpaceError(ValueError):
    """The requested orbit enumeration exceeds the state-count cap."""


def _guard(n, q, cap):
    size = q ** (n * (n - 1) // 2)
    cap = STATE_CAP_DEFAULT if cap is None else cap
    if size > cap:
        raise StateSpaceError(
            f"state space q^(n(n-1)/2) = {size} exceeds the cap {cap}; "
            "raise the cap explicitly if this is intentional"
        )
    return size


def backend_name():
    return BACKEND


def partition(n, q, cap=None):
    """Orbit id per state code, plus the first-discovered code of each orbit."""
    _guard(n, q, cap)
    return _impl.partition(n, q)


def orbit_codes(n, q, seed, cap=None):
    _guard(n, q, cap)
    return _impl.orbit_codes(n, q, seed)


def orbit_with_parents(n, q, seed, cap=None):
    _guard(n, q, cap)
    return _impl.orbit_with_parents(n, q, seed)


def successors(n, q, code):
    return _impl.successors(n, q, code)
