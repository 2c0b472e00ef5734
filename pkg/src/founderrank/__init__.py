"""Founder ranking from email-graph position, with investor discovery tools."""

__version__ = "0.1.0"
