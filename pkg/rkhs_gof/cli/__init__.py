"""Initializes the cli package."""
