"""Exact tails and certified exponential bounds for hypergeometric and
two-sample Kolmogorov-Smirnov statistics."""

__version__ = "0.1.0"
