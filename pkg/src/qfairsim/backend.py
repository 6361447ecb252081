"""Kernel lane selection.

Two interchangeable implementations of the density-matrix kernels exist:
the numba lane (:mod:`qfairsim.kernels_numba`) and the pure-NumPy lane
(:mod:`qfairsim.kernels`).  The numba lane is used by default when numba
imports; set the environment variable ``QFAIRSIM_NO_NUMBA=1`` to force the
NumPy lane.  ``use()`` switches lanes at runtime (the benchmark does this
to compare them in-process).
"""

from __future__ import annotations

import os

from . import kernels as _numpy_lane

try:
    from . import kernels_numba as _numba_lane
except ImportError:  # pragma: no cover - numba not installed
    _numba_lane = None

_DISABLED = os.environ.get("QFAIRSIM_NO_NUMBA", "").lower() in ("1", "true", "yes")

bell_probs = None
bell_collapse = None
tensor = None
ptrace = None
pure_rho = None

_active_name = ""


def use(lane: str) -> None:
    """Select the active kernel lane: ``"numba"`` or ``"numpy"``."""
    global bell_probs, bell_collapse, tensor, ptrace, pure_rho, _active_name
    if lane == "numba":
        if _numba_lane is None:
            raise RuntimeError("numba lane requested but numba is not installed")
        mod = _numba_lane
    elif lane == "numpy":
        mod = _numpy_lane
    else:
        raise ValueError(f"unknown kernel lane: {lane!r}")
    bell_probs = mod.bell_probs
    bell_collapse = mod.bell_collapse
    tensor = mod.tensor
    ptrace = mod.ptrace
    pure_rho = mod.pure_rho
    _active_name = lane


def active() -> str:
    """Name of the active kernel lane."""
    return _active_name


def available() -> tuple[str, ...]:
    return ("numpy",) if _numba_lane is None else ("numpy", "numba")


use("numpy" if (_DISABLED or _numba_lane is None) else "numba")
