"""
Main entry point for the BornLens CLI.

Verbs:
  double-slit | oscillator | barrier | superposition | gravity   run a study
  validate                                                       property suite
"""

import sys

from bornlens.cli import parse_and_dispatch


if __name__ == "__main__":
    sys.exit(parse_and_dispatch(sys.argv[1:]))
