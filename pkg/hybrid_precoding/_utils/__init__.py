"""Utilities for the package."""
