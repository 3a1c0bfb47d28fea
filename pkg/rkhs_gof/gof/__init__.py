"""Initializes the gof package."""
