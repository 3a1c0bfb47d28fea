"""Initializes the unit package."""
