"""Quantum Zeno dynamics toolkit."""
