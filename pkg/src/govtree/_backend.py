"""Kernel selection.

Prefers the compiled kernel when the extension built, otherwise the
pure-Python twin. GOVTREE_BACKEND=pure|native forces a choice (the
backend benchmark uses this); anything else falls back to auto.
"""

import os

_choice = os.environ.get("GOVTREE_BACKEND", "auto").strip().lower()

if _choice in ("pure", "py"):
    from . import _pure as kernel
elif _choice in ("native", "c"):
    from . import _native as kernel  # ImportError here is deliberate
else:
    try:
        from . import _native as kernel
    except ImportError:
        from . import _pure as kernel

BACKEND = kernel.KERNEL_NAME
