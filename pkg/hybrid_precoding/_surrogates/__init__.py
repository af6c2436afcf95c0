"""Throughput minorants and soft max-min majorants."""
