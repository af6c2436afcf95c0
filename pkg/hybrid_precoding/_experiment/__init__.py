"""Experiment configuration, presets and power accounting."""
