"""Root-growth morphological computing simulators."""

__version__ = "0.1.0"
