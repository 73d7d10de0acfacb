"""Exact loss-landscape toolkit for Gaussian teacher-student ReLU networks."""

__version__ = "0.1.0"
