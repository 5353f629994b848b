#!/usr/bin/env python
"""Command-line entry point: python run.py <command> [options]."""
from qrnn.cli import main

if __name__ == '__main__':
    main()
