"""Initializes the estimators package."""
