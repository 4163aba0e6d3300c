"""Selection of the latent-sweep kernel.

The compiled Cython kernel is preferred when its extension module built;
otherwise the numpy implementation is used. Set ``CATDIFF_BACKEND`` to
"cython" or "python" to force a choice (forcing an unavailable backend is
an error, not a silent fallback).

Chains are bitwise-reproducible for a fixed (seed, backend) pair; the two
backends consume identical random-number streams but may differ in the
last floating-point ulp of the sweep weights, so the active backend is
recorded in chain metadata.
"""

from __future__ import annotations

import os

from . import _sweep_py

try:
    from . import _sweep as _sweep_ext
except ImportError:  # extension not built; numpy path still fully functional
    _sweep_ext = None

_ENV_VAR = "CATDIFF_BACKEND"


def available_backends() -> tuple[str, ...]:
    return ("cython", "python") if _sweep_ext is not None else ("python",)


def get_sweep(name: str | None = None):
    """Return (backend_name, sweep_callable)."""
    if name is None:
        name = os.environ.get(_ENV_VAR, "").strip().lower() or None
    if name is None:
        name = "cython" if _sweep_ext is not None else "python"
    if name == "cython":
        if _sweep_ext is None:
            raise ImportError(
                "the compiled sweep kernel is not available; build the extension "
                "or set CATDIFF_BACKEND=python")
        return "cython", _sweep_ext.latent_sweep
    if name == "python":
        return "python", _sweep_py.latent_sweep
    raise ValueError(f"unknown backend {name!r}, expected 'cython' or 'python'")


DEFAULT_BACKEND = get_sweep()[0]
