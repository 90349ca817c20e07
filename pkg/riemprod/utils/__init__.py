"""Tensor, random stream and timeout helpers."""
