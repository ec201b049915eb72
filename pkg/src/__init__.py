"""tiltlab: percolation laboratory for nonunimodular transitive graphs."""

__version__ = "0.3.0"
