"""Public workflows of the hybrid precoding package."""
