"""Initializes the pk package."""
