"""Allow `python -m specshift` as an alias for the console script."""

import sys

from .runner import main

sys.exit(main())
