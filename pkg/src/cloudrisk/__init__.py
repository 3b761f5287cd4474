"""Objective-weighted security risk management toolkit."""

__version__ = "0.1.0"
