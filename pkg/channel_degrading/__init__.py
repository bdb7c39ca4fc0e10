from __future__ import annotations

import os
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    # running from a source checkout that was never installed
    __version__ = "0.0.0+unknown"

resource_dir = os.path.join(os.path.dirname(__file__), "resources")

__all__ = ["__version__", "resource_dir"]
