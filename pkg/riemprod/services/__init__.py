"""Verification, suite running and instance file services."""
