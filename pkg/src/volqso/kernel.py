"""Trajectory-kernel backend selection.

The compiled extension (`volqso._kernel`, Cython) is used when it imported
cleanly; otherwise the pure-Python mirror (`volqso._kernel_py`) takes over.
Both produce bit-identical results.  Set VOLQSO_KERNEL=python|compiled to
force a backend (forcing `compiled` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernel_py


def available_backends() -> tuple[str, ...]:
    try:
        from . import _kernel  # noqa: F401
        return ("compiled", "python")
    except ImportError:
        return ("python",)


def get_kernel(name: str):
    if name == "python":
        return _kernel_py.run
    if name == "compiled":
        try:
            from . import _kernel
        except ImportError as exc:
            raise ImportError(
                "compiled trajectory kernel is not built; reinstall with a "
                "C compiler and Cython, or set VOLQSO_KERNEL=python"
            ) from exc
        return _kernel.run
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    choice = os.environ.get("VOLQSO_KERNEL", "auto").strip().lower()
    if choice in ("py", "python", "pure"):
        return _kernel_py.run, "python"
    if choice in ("c", "compiled", "cython"):
        return get_kernel("compiled"), "compiled"
    if choice not in ("", "auto"):
        raise ValueError(
            f"VOLQSO_KERNEL={choice!r}; expected auto, python or compiled")
    try:
        return get_kernel("compiled"), "compiled"
    except ImportError:
        return _kernel_py.run, "python"


run, BACKEND = _select()
