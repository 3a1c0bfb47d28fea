"""Initializes the optimize package."""
