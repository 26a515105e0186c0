"""
symkernel - kernel envelopes on symmetric spaces of noncompact type
"""

import logging

# Define version first to avoid circular imports
__version__ = "0.1.0"

# Just get the logger without configuring it
logger = logging.getLogger("SYMKERNEL")

from .rootdata import RestrictedRootSystem, catalog_space  # noqa: E402


def main() -> int:
    """Console-script entry point; imports the front end only when called."""
    from .main import main as _main

    return _main()


__all__ = ["RestrictedRootSystem", "catalog_space", "main"]
