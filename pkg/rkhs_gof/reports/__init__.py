"""Initializes the reports package."""
