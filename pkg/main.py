#!/usr/bin/env python3
"""
owc-alloc - VCSEL optical wireless allocation simulator
Main entry point for the command line and the tool server.
"""

import os
import sys

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from owc_alloc.cli import run

if __name__ == "__main__":
    run()
