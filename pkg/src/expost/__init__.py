"""Exact ex-post equilibrium laboratory for VCG games."""
