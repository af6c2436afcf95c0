"""Closed-form and saddle-point solvers for the surrogate subproblems."""
