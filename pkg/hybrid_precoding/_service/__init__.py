"""Hybrid precoding algorithms and the experiment service."""
