#!/usr/bin/env python3
"""
tiltlab - Monte Carlo percolation on nonunimodular transitive graphs

Usage:
    python tiltlab.py verify
    python tiltlab.py chi --model fixed-end-tree:k=4 --p 0.2 --lambda 0 --samples 100000 --seed 7
"""

from src.cli.main import main

if __name__ == "__main__":
    main()
