"""Subcommand implementations for dsprec."""
