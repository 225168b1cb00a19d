"""Allows running the command line interface with 'python -m graphsos'."""
import sys

from .infrastructure.cli import main

sys.exit(main())
