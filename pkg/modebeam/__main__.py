"""Entry point for `python -m modebeam`."""

import sys

from modebeam.cli import main

if __name__ == "__main__":
    sys.exit(main())
