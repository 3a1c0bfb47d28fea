"""Initializes the cv package."""
