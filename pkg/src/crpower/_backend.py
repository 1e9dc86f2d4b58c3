"""Kernel backend selection.

The compiled extension is preferred when present; the numpy fallback is
picked up transparently otherwise.  Set ``CRPOWER_BACKEND=python`` (or
``numpy``) to force the fallback, ``CRPOWER_BACKEND=cython`` to require the
extension.
"""

import os

_requested = os.environ.get("CRPOWER_BACKEND", "").lower()

if _requested in ("py", "python", "numpy"):
    from . import _kernels_py as _impl

    BACKEND = "numpy"
elif _requested in ("", "c", "cython", "compiled"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _requested:
            raise ImportError(
                "CRPOWER_BACKEND requested the compiled backend but "
                "crpower._kernels is not built"
            )
        from . import _kernels_py as _impl

        BACKEND = "numpy"
else:
    raise ValueError(f"unrecognized CRPOWER_BACKEND={_requested!r}")

closed_form_power = _impl.closed_form_power
fixed_point_power = _impl.fixed_point_power
rate_direct = _impl.rate_direct
rate_quad = _impl.rate_quad
