"""Mapping matrices, phase grids and throughput."""
