"""Shared infrastructure used across all simulator components."""
