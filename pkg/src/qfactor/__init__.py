"""Factorization chains of second-order q-difference operators on geometric lattices."""
