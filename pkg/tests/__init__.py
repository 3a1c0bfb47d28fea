"""Initializes the tests package."""
