"""Semi-bandit learning dynamics for network congestion games."""

__version__ = "0.1.0"
