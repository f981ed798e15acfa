#!/usr/bin/env python3
"""
rtkit entry point

SEIR-based reproduction number estimation from the CSSE case feeds and its
rank correlation with the Apple mobility index. See README.md for usage.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
