"""Global numerical tolerance.

A single tolerance drives coefficient pruning and approximate equality of
forms. It defaults to 1e-9 and can be overridden with the ``G2FLOW_TOL``
environment variable or temporarily with :func:`tolerance`.
"""
import os
from contextlib import contextmanager

DEFAULT_TOL = 1e-9

_state = {"tol": float(os.environ.get("G2FLOW_TOL", DEFAULT_TOL))}


def get_tol() -> float:
    return _state["tol"]


def set_tol(value: float) -> None:
    if not value > 0:
        raise ValueError(f"tolerance must be positive, got {value!r}")
    _state["tol"] = float(value)


@contextmanager
def tolerance(value: float):
    """Temporarily replace the global tolerance."""
    old = get_tol()
    set_tol(value)
    try:
        yield
    finally:
        _state["tol"] = old
