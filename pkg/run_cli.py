#!/usr/bin/env python3
"""
wishmix CLI Launcher

Run the wishmix command-line interface from a source checkout.
"""

import os
import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.cli.main import main

if __name__ == "__main__":
    # Set default run-log directory if not specified
    if not os.getenv("WISHMIX_LOGS_DIR"):
        os.environ["WISHMIX_LOGS_DIR"] = str(project_root / "data" / "logs")

    main()
