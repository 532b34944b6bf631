"""Exponentially decaying score dynamics and baseline learners for tabular extensive-form games."""

__version__ = "0.1.0"
