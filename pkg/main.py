"""
Main entry point for the robust MDP qualitative solver
"""

import sys

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
