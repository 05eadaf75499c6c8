"""Cayley-path interpolation of random circuits and worst-to-average-case reductions."""
from .errors import QCayleyError

__version__ = "0.1.0"
__all__ = ["QCayleyError", "__version__"]
