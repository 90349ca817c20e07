"""Riemannian almost product tensor laboratory."""
