"""Static taint analysis for a JavaScript subset with taint-informed call graph repair."""

__version__ = "0.1.0"
