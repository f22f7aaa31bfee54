"""Concordance evaluation of survival predictions and C-hacking audits."""

__version__ = "0.1.0"
