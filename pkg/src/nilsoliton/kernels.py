"""Backend selection for the hot kernels.

The compiled extension (nilsoliton._accel, Cython) is preferred when it
imports cleanly; otherwise the pure-numpy reference implementation is used.
Set NILSOLITON_BACKEND=python or =compiled to force a choice ("compiled"
raises if the extension is unavailable).
"""

from __future__ import annotations

import os

from . import _reference

STATUS_FOUND = _reference.STATUS_FOUND
STATUS_DEGENERATED = _reference.STATUS_DEGENERATED
STATUS_MAX_ITER = _reference.STATUS_MAX_ITER

try:
    from . import _accel  # type: ignore[attr-defined]
except ImportError:
    _accel = None


def _pick(name: str | None):
    if name in (None, "", "auto"):
        return _accel if _accel is not None else _reference
    if name == "python":
        return _reference
    if name == "compiled":
        if _accel is None:
            raise RuntimeError("NILSOLITON_BACKEND=compiled but the "
                               "nilsoliton._accel extension is not built")
        return _accel
    raise ValueError(f"unknown backend {name!r}; use auto, python or compiled")


_impl = _pick(os.environ.get("NILSOLITON_BACKEND"))


def backend_name() -> str:
    return _impl.BACKEND_NAME


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if _accel is not None else ("python",)


def get_backend(name: str | None = None):
    """Module implementing the kernel API (moment_parts/moment_action/flow_run)."""
    return _impl if name is None else _pick(name)


def moment_parts(mats):
    return _impl.moment_parts(mats)


def moment_action(mats, m1, m2):
    return _impl.moment_action(mats, m1, m2)


def flow_run(mats, tol, rank_tol, max_iter, eta0, shrink, max_backtracks,
             want_trace=False):
    return _impl.flow_run(mats, tol, rank_tol, max_iter, eta0, shrink,
                          max_backtracks, want_trace)
