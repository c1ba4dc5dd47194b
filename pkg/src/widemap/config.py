"""Build-mode selection for global index widths.

The library can be "built" in three modes, chosen when the package is first
imported:

* dual (default): both 32-bit and 64-bit global index entry points exist;
* 32-only: ``WIDEMAP_NO_64BIT_GLOBAL_INDICES`` is set, every 64-bit entry point
  is removed;
* 64-only: ``WIDEMAP_NO_32BIT_GLOBAL_INDICES`` is set, every 32-bit entry point
  that has a 64-bit counterpart is removed.

Setting both flags is a configuration error and the import fails.

Code that wants to run unchanged in every mode tests ``HAVE_32BIT`` /
``HAVE_64BIT`` before touching a width-specific accessor (see
:func:`widemap.util.my_gids_any_mode`).
"""
import os

NO_32BIT_ENV = "WIDEMAP_NO_32BIT_GLOBAL_INDICES"
NO_64BIT_ENV = "WIDEMAP_NO_64BIT_GLOBAL_INDICES"


class BuildConfigError(ImportError):
    """Raised at import time for an impossible build configuration."""


def _flag(name):
    value = os.environ.get(name, "").strip().lower()
    return value not in ("", "0", "false", "no", "off")


NO_32BIT_GLOBAL_INDICES = _flag(NO_32BIT_ENV)
NO_64BIT_GLOBAL_INDICES = _flag(NO_64BIT_ENV)

if NO_32BIT_GLOBAL_INDICES and NO_64BIT_GLOBAL_INDICES:
    raise BuildConfigError(
        f"{NO_32BIT_ENV} and {NO_64BIT_ENV} are both set; "
        "at least one global index width must be built"
    )

HAVE_32BIT = not NO_32BIT_GLOBAL_INDICES
HAVE_64BIT = not NO_64BIT_GLOBAL_INDICES


def build_mode():
    """Return ``"dual"``, ``"32"`` or ``"64"``."""
    if HAVE_32BIT and HAVE_64BIT:
        return "dual"
    return "32" if HAVE_32BIT else "64"
