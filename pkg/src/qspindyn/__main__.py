"""Run the command line via ``python -m qspindyn``."""

import sys

from .scenarios_cli import main

if __name__ == "__main__":
    sys.exit(main())
