"""Kernel backend selection.

The compiled extension is preferred when present; otherwise the numpy
fallback is used.  Set ``DATACOMB_KERNEL=pure`` or ``=native`` to force a
backend (forcing ``native`` fails loudly if the extension is not built).
Both backends implement the same two functions and return identical values.
"""

from __future__ import annotations

import os

from . import pure

try:
    from . import _native as native  # type: ignore[attr-defined]
except ImportError:
    native = None  # type: ignore[assignment]

_forced = os.environ.get("DATACOMB_KERNEL", "").strip().lower()
if _forced == "pure":
    active = pure
elif _forced == "native":
    if native is None:
        raise ImportError(
            "DATACOMB_KERNEL=native but the compiled kernel is not built; "
            "reinstall the package or unset the variable"
        )
    active = native
elif _forced:
    raise ImportError(f"unknown DATACOMB_KERNEL value {_forced!r} (expected 'pure' or 'native')")
else:
    active = native if native is not None else pure


def backend_name() -> str:
    """Name of the kernel backend in use ('native' or 'pure')."""
    return active.NAME
