"""Initializes the inverse package."""
