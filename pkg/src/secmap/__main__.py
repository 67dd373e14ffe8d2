"""Module entry point so `python -m secmap` works."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
