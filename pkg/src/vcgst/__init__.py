"""Incremental graph self-attention pipeline for start-up success
prediction on temporal bipartite investment networks."""

__version__ = "0.1.0"
