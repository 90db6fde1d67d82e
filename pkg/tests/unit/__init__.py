"""Unit tests for dsprec."""
