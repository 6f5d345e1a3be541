"""Backend selection for the RK4 inner loop.

The compiled extension is used when it was built; otherwise the numpy
fallback takes over. Both share one signature, see ``_rk4_py.rk4_steps``.
"""

from . import _rk4_py

try:
    from . import _rk4 as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _rk4_py.rk4_steps}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled.rk4_steps

BACKEND = "cython" if _compiled is not None else "python"
rk4_steps = _BACKENDS[BACKEND]


def available_backends():
    return sorted(_BACKENDS)


def use_backend(name: str) -> None:
    """Switch the process-wide RK4 backend (``"cython"`` or ``"python"``)."""
    global BACKEND, rk4_steps
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    BACKEND = name
    rk4_steps = _BACKENDS[name]


def get(name: str = None):
    return _BACKENDS[name or BACKEND]
