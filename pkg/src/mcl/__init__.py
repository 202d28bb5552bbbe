"""Metric-tree similarity search and high-dimensional workload experiments."""

__version__ = "0.1.0"
