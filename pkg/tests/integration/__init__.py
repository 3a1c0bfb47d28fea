"""Initializes the integration package."""
