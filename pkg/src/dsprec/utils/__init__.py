"""Utility modules for dsprec."""
