"""Pointwise geometry of Riemannian almost product structures."""
