"""Monte Carlo laboratory for relative complexity of random walks in random sceneries."""

__version__ = "0.1.0"
