"""Two-level chaining polar codes for the three-receiver broadcast channel with degraded message sets."""

__version__ = "0.1.0"
