#!/usr/bin/env python3
"""
Launcher for the fleetopt command line.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from src.cli import main
from src.utils.config import Config


if __name__ == "__main__":
    if not Config.validate_config():
        print("Invalid configuration; check the FLEETOPT_* environment variables", file=sys.stderr)
        sys.exit(3)
    sys.exit(main())
