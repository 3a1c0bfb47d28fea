"""Initializes the kernels package."""
