"""Scoring-kernel backends.

The compiled Cython core is preferred when it was built; the pure-numpy
fallback is always present. ``FASTFISH_BACKEND=py|ext|auto`` overrides the
default selection, and callers may pass an explicit name.
"""

from __future__ import annotations

import os

from ..exceptions import InvalidInputError
from . import pyfallback

try:
    from . import _core
except ImportError:  # built without the extension
    _core = None


def available() -> tuple[str, ...]:
    return ("py", "ext") if _core is not None else ("py",)


def get_backend(name: str | None = None):
    """Resolve a backend module by name ('auto', 'py', 'ext')."""
    name = name or os.environ.get("FASTFISH_BACKEND", "auto")
    if name == "auto":
        return _core if _core is not None else pyfallback
    if name == "py":
        return pyfallback
    if name == "ext":
        if _core is None:
            raise InvalidInputError("compiled backend requested but not built")
        return _core
    raise InvalidInputError(f"unknown backend {name!r} (expected auto, py, or ext)")
